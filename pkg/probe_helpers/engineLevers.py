# =================================================
# NUMERICAL TOLERANCES
# =================================================

# A slice pairing is accepted as symmetric if |G - G^T| stays below this
# (scaled by the largest |entry| when that exceeds 1)
SYMMETRY_TOL = 1e-12

# Eigenvalues of the slice pairing with |lambda| below DEGENERACY_TOL * max|lambda|
# make the pairing degenerate (no signed orthonormal basis exists)
DEGENERACY_TOL = 1e-10

# Slack for positive-cone membership, cone order and quotient bounds.
# The command line flag --tolerance overrides this for one run.
MEMBERSHIP_TOL = 1e-9

# A signed basis must reproduce (-1)^sigma(k) delta_kl within this
SIGNED_BASIS_TOL = 1e-10

# Quantum inputs: self-adjointness, trace preservation of Kraus sets, unitarity
HERMITIAN_TOL = 1e-10
KRAUS_TOL = 1e-10
UNITARY_TOL = 1e-10

# Denominators at or below this fraction of ||T|| * prod ||b_j|| mean
# "incompatible boundary condition"
ZERO_DENOMINATOR_TOL = 1e-14

# =================================================
# PROBE ORDER CHECKING (PSD cones)
# =================================================

# probe_le over PSD cones checks a fixed extremal set of rank-1 projectors and
# this many extra random pure-state projectors per boundary atom
PSD_RANDOM_SAMPLES = 16

# Seed for the random projectors, so repeated checks give repeated answers
PSD_SAMPLE_SEED = 20131105

# =================================================
# SPEC LANGUAGE AND COMMAND LINE
# =================================================

# Deepest list nesting the parser follows before reporting a diagnostic
# (kraus sets are 3 levels deep, rank-4 tensors are 4)
MAX_LIST_NESTING = 12

# Significant digits for floats in JSON output (bit-exact double round trip)
JSON_SIGNIFICANT_DIGITS = 17

# "text" or "json"
DEFAULT_OUTPUT_FORMAT = "text"

# Number of worker threads used to evaluate queries (1 = sequential)
DEFAULT_JOBS = 1

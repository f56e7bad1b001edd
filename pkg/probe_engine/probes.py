"""
Probe Engine
============
Probes as multilinear functionals on boundary conditions.

- Probe: region plus a coefficient tensor, one index per boundary atom
- BoundaryAssignment: one BCVector per boundary atom
- evaluate / compose / induced_boundary_condition: values and the signed-basis
  composition rule
- probe_le: the probe partial order, checked on cone generators
- cond_prob_probe / cond_prob_boundary / expectation: the quotient formulas

Usage:
    value = evaluate(P, BoundaryAssignment.of(P.atoms, [rho, effect]))
    PQ = compose(P, Q, gluing, cx)
    result = cond_prob_probe(P_green, P_presence, b)
"""

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from probe_helpers.engineLevers import MEMBERSHIP_TOL, PSD_RANDOM_SAMPLES, ZERO_DENOMINATOR_TOL
from .errors import (
    DimensionMismatchError,
    GluingMismatchError,
    IncompleteAssignmentError,
    NonFiniteValueError,
    RegionMismatchError,
    SpaceMismatchError,
    ZeroDenominatorError,
)
from .ordered_linear_core import (
    BCVector,
    SignedBasis,
    cone_contains,
    cone_generators,
    cone_le,
    validate_signed_basis,
)
from .spacetime_complex import Region, RegionKind, SpacetimeComplex

# Backends whose spaces use the identity pairing with a self-dual cone;
# contracting primitive probes over them keeps the result primitive
SELF_DUAL_BACKENDS = ("quantum", "classical")


# =============================================================================
# DATA TYPES
# =============================================================================

@dataclass(frozen=True, eq=False)
class Probe:
    """
    A probe P in P_M stored as a dense coefficient tensor.

    Attributes:
        region_id: Region the probe lives in
        atoms: Boundary atoms in tensor-axis order
        spaces: Space identifier of every boundary atom
        tensor: Entry [i1, ..., ir] is the value on the reference-basis tuple
        primitive: Claim that values on tuples of cone members are >= 0
        label: Optional display name
    """

    region_id: str
    atoms: tuple[str, ...]
    spaces: tuple[str, ...]
    tensor: np.ndarray
    primitive: bool = False
    label: str = ""

    def __post_init__(self):
        tensor = np.array(self.tensor, dtype=np.float64)
        if tensor.ndim != len(self.atoms) or len(self.spaces) != len(self.atoms):
            raise DimensionMismatchError(
                f"probe tensor has rank {tensor.ndim} but the region has {len(self.atoms)} boundary atoms"
            )
        if not np.all(np.isfinite(tensor)):
            raise NonFiniteValueError(f"probe '{self.label or self.region_id}' has non-finite entries")
        tensor.setflags(write=False)
        object.__setattr__(self, "tensor", tensor)
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "spaces", tuple(self.spaces))

    @property
    def arity(self) -> int:
        return len(self.atoms)

    def _same_region(self, other: "Probe") -> None:
        if other.region_id != self.region_id or other.atoms != self.atoms:
            raise RegionMismatchError(
                f"probes live on different regions ('{self.region_id}' vs '{other.region_id}')"
            )

    def _derive(self, tensor: np.ndarray, primitive: bool) -> "Probe":
        return Probe(self.region_id, self.atoms, self.spaces, tensor, primitive)

    def __add__(self, other: "Probe") -> "Probe":
        self._same_region(other)
        return self._derive(self.tensor + other.tensor, self.primitive and other.primitive)

    def __sub__(self, other: "Probe") -> "Probe":
        self._same_region(other)
        return self._derive(self.tensor - other.tensor, False)

    def __mul__(self, scalar: float) -> "Probe":
        scalar = float(scalar)
        return self._derive(self.tensor * scalar, self.primitive and scalar >= 0.0)

    __rmul__ = __mul__

    def __neg__(self) -> "Probe":
        return self * -1.0

    def relabel(self, label: str) -> "Probe":
        return Probe(self.region_id, self.atoms, self.spaces, self.tensor, self.primitive, label)


@dataclass(frozen=True, eq=False)
class BoundaryAssignment:
    """Map from boundary atom id to the boundary condition placed on it."""

    values: Mapping[str, BCVector] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "values", dict(self.values))

    @classmethod
    def of(cls, atoms: Sequence[str], vectors: Sequence[BCVector]) -> "BoundaryAssignment":
        if len(atoms) != len(vectors):
            raise IncompleteAssignmentError(f"{len(atoms)} atoms but {len(vectors)} boundary conditions")
        return cls(dict(zip(atoms, vectors)))

    def __getitem__(self, atom_id: str) -> BCVector:
        return self.values[atom_id]

    def __contains__(self, atom_id: str) -> bool:
        return atom_id in self.values

    def with_atom(self, atom_id: str, vector: BCVector) -> "BoundaryAssignment":
        updated = dict(self.values)
        updated[atom_id] = vector
        return BoundaryAssignment(updated)

    def union(self, other: "BoundaryAssignment") -> "BoundaryAssignment":
        merged = dict(self.values)
        merged.update(other.values)
        return BoundaryAssignment(merged)


@dataclass(frozen=True)
class QueryResult:
    """Numerator, denominator and quotient of a conditional formula."""

    numerator: float
    denominator: float
    quotient: Optional[float]
    diagnostics: tuple[str, ...] = ()


# =============================================================================
# CONSTRUCTION
# =============================================================================

def make_probe(
    cx: SpacetimeComplex,
    region: Region,
    tensor,
    primitive: bool = False,
    label: str = "",
) -> Probe:
    """
    Build a probe on a registered region, checking the tensor shape.

    Args:
        cx: Complex holding the region and its atoms' spaces
        region: Region the probe lives in
        tensor: Array with one axis per boundary atom, sized by the atom's space
        primitive: Claim of nonnegativity on cone tuples
        label: Optional display name
    """
    region = cx.region(region.region_id)
    spaces = tuple(cx.atom(a).space_id for a in region.boundary)
    expected = tuple(cx.space(s).dim for s in spaces)
    tensor = np.asarray(tensor, dtype=np.float64)
    if tensor.shape != expected:
        raise DimensionMismatchError(
            f"probe on '{region.label}' needs a tensor of shape {expected}, got {tensor.shape}"
        )
    return Probe(region.region_id, region.boundary, spaces, tensor, primitive, label)


def zero_probe(cx: SpacetimeComplex, region: Region) -> Probe:
    """The trivial probe 0 (all-zeros tensor)."""
    region = cx.region(region.region_id)
    shape = tuple(cx.space_of(a).dim for a in region.boundary)
    return make_probe(cx, region, np.zeros(shape), primitive=True, label="0")


def zero_like(P: Probe) -> Probe:
    return Probe(P.region_id, P.atoms, P.spaces, np.zeros_like(P.tensor), True, "0")


def slice_null_probe(cx: SpacetimeComplex, region: Region) -> Probe:
    """Null-probe of a slice region; its values are the slice pairing."""
    region = cx.region(region.region_id)
    if region.kind != RegionKind.SLICE:
        raise RegionMismatchError(f"region '{region.label}' is not a slice region")
    space = cx.space_of(region.boundary[0])
    return make_probe(
        cx, region, np.array(space.pairing.gram), primitive=space.backend in SELF_DUAL_BACKENDS, label="null"
    )


def ensemble(probes: Sequence[Probe], weights: Sequence[float], tol: float = MEMBERSHIP_TOL) -> Probe:
    """
    Probabilistic ensemble sum_i w_i P_i with w_i >= 0 and sum w_i = 1.

    The result is primitive iff every member is.
    """
    if not probes or len(probes) != len(weights):
        raise ValueError("an ensemble needs one weight per probe")
    weights = [float(w) for w in weights]
    if min(weights) < 0.0 or abs(sum(weights) - 1.0) > tol:
        raise ValueError(f"ensemble weights must be nonnegative and sum to 1, got {weights}")
    result = probes[0] * weights[0]
    for probe, weight in zip(probes[1:], weights[1:]):
        result = result + probe * weight
    return result


# =============================================================================
# EVALUATION AND COMPOSITION
# =============================================================================

def _ordered_coords(P: Probe, b: BoundaryAssignment) -> list[np.ndarray]:
    coords = []
    for atom_id, space_id, size in zip(P.atoms, P.spaces, P.tensor.shape):
        if atom_id not in b:
            raise IncompleteAssignmentError(f"no boundary condition assigned to atom '{atom_id}'")
        vec = b[atom_id]
        if vec.space_id != space_id:
            raise SpaceMismatchError(
                f"atom '{atom_id}' carries space '{space_id}' but was given a vector of '{vec.space_id}'"
            )
        if vec.dim != size:
            raise DimensionMismatchError(f"atom '{atom_id}' needs {size} coordinates, got {vec.dim}")
        coords.append(vec.coords)
    return coords


def evaluate(P: Probe, b: BoundaryAssignment) -> float:
    """Value (P, b)_M: contract the tensor with one coordinate vector per atom."""
    values = P.tensor
    for coords in _ordered_coords(P, b):
        values = np.tensordot(coords, values, axes=(0, 0))
    return float(values)


def _interface_kernels(
    cx: SpacetimeComplex,
    interface: Sequence[str],
    bases: Optional[Mapping[str, SignedBasis]],
) -> list[SignedBasis]:
    chosen = []
    for atom_id in interface:
        space = cx.space_of(atom_id)
        basis = None
        if bases:
            basis = bases.get(atom_id) or bases.get(space.space_id)
        if basis is None:
            basis = cx.signed_basis(space.space_id)
        else:
            validate_signed_basis(space, basis)
        chosen.append(basis)
    return chosen


def compose(
    P: Probe,
    Q: Probe,
    gluing,
    cx: SpacetimeComplex,
    bases: Optional[Mapping[str, SignedBasis]] = None,
) -> Probe:
    """
    Composite probe P<>Q on the glued region.

    (P<>Q)[b, c] = sum_k prod_j (-1)^sigma(k_j) P[b, b_k1..b_km] Q[b_k1..b_km, c],
    one signed sum per interface atom.

    Args:
        P: Probe on gluing.left
        Q: Probe on gluing.right
        gluing: Gluing returned by SpacetimeComplex.glue
        cx: Complex holding regions, spaces and cached signed bases
        bases: Optional replacement signed bases keyed by atom id or space id

    Raises:
        GluingMismatchError: P or Q is not on the glued regions
    """
    if P.region_id != gluing.left or Q.region_id != gluing.right:
        raise GluingMismatchError(
            f"gluing joins '{gluing.left}' and '{gluing.right}', got probes on '{P.region_id}' and '{Q.region_id}'"
        )
    composite = cx.region(gluing.composite)
    interface = tuple(gluing.interface)
    chosen = _interface_kernels(cx, interface, bases)

    p_rest = [i for i, a in enumerate(P.atoms) if a not in interface]
    q_rest = [i for i, a in enumerate(Q.atoms) if a not in interface]
    p_iface = [P.atoms.index(a) for a in interface]
    q_iface = [Q.atoms.index(a) for a in interface]

    left = np.transpose(P.tensor, p_rest + p_iface)
    rest = len(p_rest)
    for basis in chosen:
        # contracts the leading interface axis and appends the kernel axis at the end
        left = np.tensordot(left, basis.contraction_kernel(), axes=([rest], [0]))
    right = np.transpose(Q.tensor, q_iface + q_rest)
    m = len(interface)
    tensor = np.tensordot(left, right, axes=(list(range(rest, rest + m)), list(range(m))))

    atoms = tuple(P.atoms[i] for i in p_rest) + tuple(Q.atoms[i] for i in q_rest)
    if atoms != composite.boundary:
        raise GluingMismatchError(f"composite boundary {composite.boundary} does not match contraction order {atoms}")
    spaces = tuple(P.spaces[i] for i in p_rest) + tuple(Q.spaces[i] for i in q_rest)
    primitive = (
        P.primitive
        and Q.primitive
        and all(b.signature == 0 for b in chosen)
        and all(cx.space_of(a).backend in SELF_DUAL_BACKENDS for a in interface)
    )
    return Probe(composite.region_id, atoms, spaces, tensor, primitive)


def induced_boundary_condition(
    Q: Probe,
    c_partial: BoundaryAssignment,
    interface_atom: str,
    cx: SpacetimeComplex,
    basis: Optional[SignedBasis] = None,
) -> BCVector:
    """
    Boundary condition q on the interface that reproduces Q's effect.

    q = sum_k (-1)^sigma(k) b_k (Q, c_partial + b_k), so that
    (Q, c_partial + x) = pairing(x, q) for every x.

    Raises:
        GluingMismatchError: interface_atom is not on Q's boundary
    """
    if interface_atom not in Q.atoms:
        raise GluingMismatchError(f"atom '{interface_atom}' is not on the boundary of probe region '{Q.region_id}'")
    space = cx.space_of(interface_atom)
    basis = cx.signed_basis(space.space_id) if basis is None else validate_signed_basis(space, basis)
    q = np.zeros(space.dim)
    for sign, b_k in zip(basis.sign_factors, basis.as_vectors()):
        q += sign * evaluate(Q, c_partial.with_atom(interface_atom, b_k)) * b_k.coords
    return space.vector(q)


# =============================================================================
# PARTIAL ORDER
# =============================================================================

def order_margin(
    P: Probe,
    Q: Probe,
    cx: SpacetimeComplex,
    samples: int = PSD_RANDOM_SAMPLES,
    rng: Optional[np.random.Generator] = None,
) -> float:
    """Smallest value of (Q - P) over all tuples of cone generators."""
    P._same_region(Q)
    values = Q.tensor - P.tensor
    for atom_id in P.atoms:
        gens = cone_generators(cx.space_of(atom_id).cone, samples=samples, rng=rng)
        # contracts the leading atom axis, appends a generator axis at the end
        values = np.tensordot(values, gens, axes=([0], [1]))
    return float(np.min(values)) if values.size else 0.0


def probe_le(
    P: Probe,
    Q: Probe,
    cx: SpacetimeComplex,
    tol: float = MEMBERSHIP_TOL,
    samples: int = PSD_RANDOM_SAMPLES,
    rng: Optional[np.random.Generator] = None,
) -> bool:
    """
    P <= Q iff (Q - P, b) >= -tol for all generator tuples b.

    Exact for orthant and finitely generated cones. For PSD cones the check
    covers a fixed extremal projector set plus random projectors, so True is
    certified on the checked set only.
    """
    return order_margin(P, Q, cx, samples=samples, rng=rng) >= -tol


def is_primitive(P: Probe, cx: SpacetimeComplex, tol: float = MEMBERSHIP_TOL) -> bool:
    """Spot-check the primitive claim: 0 <= P on cone generators."""
    return probe_le(zero_like(P), P, cx, tol=tol)


# =============================================================================
# QUOTIENT FORMULAS
# =============================================================================

def contraction_scale(P: Probe, b: BoundaryAssignment) -> float:
    """Upper bound ||T|| * prod_j ||b_j|| on |(P, b)|; round-off in the value scales with it."""
    scale = float(np.linalg.norm(P.tensor))
    for coords in _ordered_coords(P, b):
        scale *= float(np.linalg.norm(coords))
    return scale


def _quotient(numerator: float, denominator: float, what: str, scale: float) -> float:
    # relative to the contraction size, so rescaling b never turns a quotient into an error
    if abs(denominator) <= ZERO_DENOMINATOR_TOL * scale:
        raise ZeroDenominatorError(
            f"{what} vanishes (denominator {denominator:.3e}): the boundary condition is incompatible",
            numerator,
            denominator,
        )
    return numerator / denominator


def _bound_diagnostic(quotient: float, tol: float) -> list[str]:
    if quotient < -tol or quotient > 1.0 + tol:
        return [f"quotient {quotient:.12g} lies outside [0, 1]: hierarchy or precondition violated"]
    return []


def value(P: Probe, b: BoundaryAssignment) -> QueryResult:
    """Plain value as a QueryResult (denominator 1)."""
    v = evaluate(P, b)
    return QueryResult(v, 1.0, v)


def compatibility(null_probe: Probe, b: BoundaryAssignment) -> QueryResult:
    """(null, b)_M read as the compatibility of b with the bare region."""
    return value(null_probe, b)


def cond_prob_probe(
    P_spec: Probe,
    P_gen: Probe,
    b: BoundaryAssignment,
    cx: Optional[SpacetimeComplex] = None,
    check_hierarchy: bool = False,
    tol: float = MEMBERSHIP_TOL,
) -> QueryResult:
    """
    Probability of the special outcome given the presence of the apparatus.

    quotient = (P_spec, b) / (P_gen, b). With check_hierarchy (needs cx) the
    order 0 <= P_spec <= P_gen is verified via probe_le and failures are
    reported in the diagnostics.
    """
    P_spec._same_region(P_gen)
    diagnostics: list[str] = []
    if check_hierarchy:
        if cx is None:
            raise ValueError("checking the probe hierarchy needs the spacetime complex")
        if not probe_le(zero_like(P_spec), P_spec, cx, tol=tol):
            diagnostics.append("hierarchy: 0 <= P_spec does not hold")
        if not probe_le(P_spec, P_gen, cx, tol=tol):
            diagnostics.append("hierarchy: P_spec <= P_gen does not hold")
    numerator = evaluate(P_spec, b)
    denominator = evaluate(P_gen, b)
    quotient = _quotient(numerator, denominator, "value of the general probe", contraction_scale(P_gen, b))
    diagnostics.extend(_bound_diagnostic(quotient, tol))
    return QueryResult(numerator, denominator, quotient, tuple(diagnostics))


def cond_prob_boundary(
    P: Probe,
    c: BoundaryAssignment,
    b: BoundaryAssignment,
    cx: SpacetimeComplex,
    tol: float = MEMBERSHIP_TOL,
) -> QueryResult:
    """
    Probability that c is realised given that b is, for a primitive probe.

    Preconditions (primitive P, 0 <= c <= b on every atom) are checked and
    reported as diagnostics when they fail.
    """
    diagnostics: list[str] = []
    if not P.primitive:
        diagnostics.append("precondition: probe is not primitive")
    for atom_id in P.atoms:
        if atom_id not in c or atom_id not in b:
            continue
        cone = cx.space_of(atom_id).cone
        if not cone_contains(cone, c[atom_id], tol=tol):
            diagnostics.append(f"precondition: c is not in the positive cone on atom '{atom_id}'")
        if not cone_le(cone, c[atom_id], b[atom_id], tol=tol):
            diagnostics.append(f"precondition: c <= b fails on atom '{atom_id}'")
    numerator = evaluate(P, c)
    denominator = evaluate(P, b)
    quotient = _quotient(numerator, denominator, "value on the general boundary condition", contraction_scale(P, b))
    diagnostics.extend(_bound_diagnostic(quotient, tol))
    return QueryResult(numerator, denominator, quotient, tuple(diagnostics))


def expectation(Q: Probe, Q0: Probe, b: BoundaryAssignment) -> QueryResult:
    """Expectation value (Q, b) / (Q0, b); no [0, 1] bound applies."""
    Q._same_region(Q0)
    numerator = evaluate(Q, b)
    denominator = evaluate(Q0, b)
    quotient = _quotient(numerator, denominator, "value of the presence probe", contraction_scale(Q0, b))
    return QueryResult(numerator, denominator, quotient)

"""
Probe Engine Package
====================
Finite-dimensional evaluation engine for operationally local probes.

Modules:
- ordered_linear_core: boundary spaces, positive cones, slice pairings, signed bases
- spacetime_complex: atoms, regions, slice regions, gluing
- probes: probes, evaluation, composition rule, probe order, quotient formulas
- quantum_model: self-adjoint operator spaces and quantum operations
- classical_model: deterministic solution tables and statistical kernels
- light_models: apparatus hierarchies (one light, two lights, scale)

Usage:
    from probe_engine import (
        SpacetimeComplex, qm_space, probe_from_kraus, KrausSet,
        evaluate, compose, cond_prob_probe,
    )
"""

import os
import sys

# Ensure project root is on sys.path for probe_helpers import
_PE_BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if _PE_BASE_DIR not in sys.path:
    sys.path.insert(0, _PE_BASE_DIR)

from .errors import ProbeFrameworkError, ZeroDenominatorError, error_code
from .ordered_linear_core import (
    BCVector, BoundarySpaceSpec, ConeSpec, SignedBasis, SlicePairing,
    ORTHANT, PSD, GENERATORS,
    cone_contains, cone_le, cone_generators, pairing_eval, orthonormalize,
    generic_space, validate_signed_basis, rotate_signed_basis, reconstruct_gram,
)
from .spacetime_complex import Atom, Gluing, Region, RegionKind, SpacetimeComplex
from .probes import (
    BoundaryAssignment, Probe, QueryResult,
    make_probe, zero_probe, zero_like, slice_null_probe, ensemble,
    evaluate, compose, induced_boundary_condition, probe_le, order_margin, is_primitive,
    value, compatibility, cond_prob_probe, cond_prob_boundary, expectation, contraction_scale,
)
from .quantum_model import (
    KrausSet, qm_space, state_bc, effect_bc, pure_state, probe_from_kraus, null_probe_qm,
    instrument_probes, observable_probe,
    random_pure_state, random_density_matrix, random_unitary, random_kraus_set,
)
from .classical_model import (
    StateSet, Solution, SolutionTable, ObservableTable,
    det_null_value, det_observable_value, glue_tables,
    stat_space, stat_probe, permissive_probe, stat_probe_from_table, indicator_bc, distribution_bc,
)
from .light_models import (
    coarse_grain, one_light_quantum, two_light_quantum, one_light_classical, two_light_classical,
    scale_apparatus_classical, ScaleApparatus,
)

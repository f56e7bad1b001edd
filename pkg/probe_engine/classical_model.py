"""
Classical Model
===============
Classical physics as a backend of the probe engine, on finite state sets.

Deterministic setting: boundary conditions are boundary states, the null-probe
answers 1 iff some solution induces them, observables give O(phi) on the
matching solution. There is no vector-space composition here; tables are
glued by pairing solutions that agree on the interface.

Statistical setting: boundary conditions are nonnegative weight vectors over
the states (orthant cone, counting pairing), probes are kernels summed
against the weights, and composition is marginalisation over the interface.
"""

from dataclasses import dataclass
from itertools import product
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .errors import (
    AmbiguousBoundaryError,
    DimensionMismatchError,
    InvalidStateError,
    KernelError,
    RegionMismatchError,
)
from .ordered_linear_core import BCVector, BoundarySpaceSpec, ConeSpec, SlicePairing
from .probes import Probe, make_probe
from .spacetime_complex import Region, SpacetimeComplex


# =============================================================================
# DATA TYPES
# =============================================================================

@dataclass(frozen=True)
class StateSet:
    """Finite stand-in for the germs of solutions L_Sigma on one kind of hypersurface."""

    label: str
    states: tuple[str, ...]

    def __post_init__(self):
        states = tuple(str(s) for s in self.states)
        if not states:
            raise InvalidStateError(f"state set '{self.label}' must not be empty")
        if len(set(states)) != len(states):
            raise InvalidStateError(f"state set '{self.label}' has repeated states")
        object.__setattr__(self, "states", states)

    def index(self, state: str) -> int:
        try:
            return self.states.index(state)
        except ValueError:
            raise InvalidStateError(f"'{state}' is not a state of '{self.label}'") from None

    def __len__(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class Solution:
    """One interior solution phi and the boundary states it induces."""

    label: str
    boundary: tuple[str, ...]


@dataclass(frozen=True)
class SolutionTable:
    """
    Finite L_M with its map L_M -> L_dM.

    Attributes:
        region_id: Region the solutions live in
        atoms: Boundary atoms, in the order of every solution's boundary tuple
        state_sets: State set of every boundary atom
        solutions: Labeled solutions with their boundary states
    """

    region_id: str
    atoms: tuple[str, ...]
    state_sets: tuple[StateSet, ...]
    solutions: tuple[Solution, ...] = ()

    def __post_init__(self):
        if len(self.atoms) != len(self.state_sets):
            raise DimensionMismatchError("solution table needs one state set per boundary atom")
        labels = [s.label for s in self.solutions]
        if len(set(labels)) != len(labels):
            raise InvalidStateError(f"solution labels must be unique, got {labels}")
        for solution in self.solutions:
            self.check_boundary(solution.boundary)

    def check_boundary(self, b: Sequence[str]) -> tuple[str, ...]:
        b = tuple(b)
        if len(b) != len(self.atoms):
            raise DimensionMismatchError(f"boundary tuple needs {len(self.atoms)} states, got {len(b)}")
        for state, states in zip(b, self.state_sets):
            states.index(state)
        return b

    def matching(self, b: Sequence[str]) -> list[Solution]:
        b = self.check_boundary(b)
        return [s for s in self.solutions if s.boundary == b]


@dataclass(frozen=True)
class ObservableTable:
    """Observable O: L_M -> R given solution by solution."""

    values: Mapping[str, float]

    def __post_init__(self):
        object.__setattr__(self, "values", {str(k): float(v) for k, v in dict(self.values).items()})

    def covers(self, table: SolutionTable) -> None:
        missing = [s.label for s in table.solutions if s.label not in self.values]
        if missing:
            raise InvalidStateError(f"observable is undefined on solutions {missing}")


# =============================================================================
# DETERMINISTIC SETTING
# =============================================================================

def det_null_value(table: SolutionTable, b: Sequence[str]) -> int:
    """1 if some solution induces exactly b, else 0."""
    return 1 if table.matching(b) else 0


def det_observable_value(table: SolutionTable, O: ObservableTable, b: Sequence[str]) -> float:
    """
    O(phi) for the solution phi inducing b, 0 if there is none.

    Raises:
        AmbiguousBoundaryError: boundary-equivalent solutions carry different O values
    """
    O.covers(table)
    matches = table.matching(b)
    if not matches:
        return 0.0
    values = {O.values[s.label] for s in matches}
    if len(values) > 1:
        raise AmbiguousBoundaryError(
            f"solutions {[s.label for s in matches]} share boundary {tuple(b)} but the observable differs"
        )
    return values.pop()


def glue_tables(left: SolutionTable, right: SolutionTable, gluing, cx: SpacetimeComplex) -> SolutionTable:
    """
    Deterministic gluing: pairs of solutions that agree on every interface atom.

    The composite boundary follows gluing (left's remaining atoms, then right's).
    """
    if left.region_id != gluing.left or right.region_id != gluing.right:
        raise RegionMismatchError("solution tables do not match the gluing")
    interface = tuple(gluing.interface)
    left_if = [left.atoms.index(a) for a in interface]
    right_if = [right.atoms.index(a) for a in interface]
    left_rest = [i for i, a in enumerate(left.atoms) if a not in interface]
    right_rest = [i for i, a in enumerate(right.atoms) if a not in interface]

    solutions = []
    for s in left.solutions:
        for t in right.solutions:
            if [s.boundary[i] for i in left_if] != [t.boundary[j] for j in right_if]:
                continue
            boundary = tuple(s.boundary[i] for i in left_rest) + tuple(t.boundary[j] for j in right_rest)
            solutions.append(Solution(f"{s.label}*{t.label}", boundary))

    composite = cx.region(gluing.composite)
    state_sets = tuple(left.state_sets[i] for i in left_rest) + tuple(right.state_sets[j] for j in right_rest)
    return SolutionTable(composite.region_id, composite.boundary, state_sets, tuple(solutions))


# =============================================================================
# STATISTICAL SETTING
# =============================================================================

def stat_space(ss: StateSet) -> BoundarySpaceSpec:
    """Weights over the states: orthant cone, indicator basis, counting pairing."""
    dim = len(ss)
    return BoundarySpaceSpec(
        dim=dim,
        cone=ConeSpec.orthant(dim),
        pairing=SlicePairing.identity(dim),
        label=ss.label,
        basis_labels=ss.states,
        backend="classical",
    )


def state_set_of(space: BoundarySpaceSpec) -> StateSet:
    if space.basis_labels is None:
        raise InvalidStateError(f"space '{space.label}' has no named states")
    return StateSet(space.label, space.basis_labels)


def indicator_bc(space: BoundarySpaceSpec, state: str) -> BCVector:
    return space.basis_vector(space.index_of(state))


def distribution_bc(space: BoundarySpaceSpec, weights: Union[Mapping[str, float], Sequence[float]]) -> BCVector:
    """Weight vector over the states (not normalised)."""
    if isinstance(weights, Mapping):
        coords = np.zeros(space.dim)
        for state, w in weights.items():
            coords[space.index_of(state)] = float(w)
        return space.vector(coords)
    return space.vector(weights)


def stat_probe(
    cx: SpacetimeComplex,
    region: Region,
    kernel: Union[Mapping[tuple, float], np.ndarray, Sequence],
    primitive: bool = True,
    label: str = "",
) -> Probe:
    """
    Probe summing a kernel over boundary-state tuples.

    Args:
        kernel: Mapping from state-label tuples to values (must cover every
            tuple), or an array indexed in state order
        primitive: Declare the probe primitive; negative entries are then rejected
    """
    region = cx.region(region.region_id)
    state_sets = [state_set_of(cx.space_of(a)) for a in region.boundary]
    shape = tuple(len(s) for s in state_sets)
    if isinstance(kernel, Mapping):
        tensor = np.zeros(shape)
        normalised = {tuple(k) if isinstance(k, (tuple, list)) else (k,): v for k, v in kernel.items()}
        for states in product(*(s.states for s in state_sets)):
            if states not in normalised:
                raise KernelError(f"kernel has no entry for boundary states {states}")
            tensor[tuple(s.index(x) for s, x in zip(state_sets, states))] = float(normalised[states])
    else:
        tensor = np.asarray(kernel, dtype=np.float64)
        if tensor.shape != shape:
            raise KernelError(f"kernel for '{region.label}' needs shape {shape}, got {tensor.shape}")
    if primitive and np.any(tensor < 0.0):
        raise KernelError(f"primitive kernel for '{region.label}' has negative entries")
    return make_probe(cx, region, tensor, primitive=primitive, label=label)


def permissive_probe(cx: SpacetimeComplex, region: Region) -> Probe:
    """Kernel 1 on every boundary tuple: the null-probe of an unconstrained region."""
    region = cx.region(region.region_id)
    shape = tuple(cx.space_of(a).dim for a in region.boundary)
    return make_probe(cx, region, np.ones(shape), primitive=True, label="null")


def stat_probe_from_table(
    cx: SpacetimeComplex,
    table: SolutionTable,
    weights: Optional[Mapping[str, float]] = None,
    observable: Optional[ObservableTable] = None,
) -> Probe:
    """
    Statistical lift of a deterministic table.

    kernel(b) = sum over solutions phi inducing b of w(phi) [* O(phi)],
    with w = 1 for every solution when no weights are given.
    """
    region = cx.region(table.region_id)
    if region.boundary != table.atoms:
        raise RegionMismatchError("solution table atoms differ from the region boundary")
    if observable is not None:
        observable.covers(table)
    shape = tuple(len(s) for s in table.state_sets)
    tensor = np.zeros(shape)
    for solution in table.solutions:
        w = 1.0 if weights is None else float(weights.get(solution.label, 0.0))
        if observable is not None:
            w *= observable.values[solution.label]
        idx = tuple(s.index(x) for s, x in zip(table.state_sets, solution.boundary))
        tensor[idx] += w
    primitive = observable is None and bool(np.all(tensor >= 0.0))
    return make_probe(cx, region, tensor, primitive=primitive)

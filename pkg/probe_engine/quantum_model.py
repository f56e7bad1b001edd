"""
Quantum Model
=============
Finite-dimensional quantum theory as a backend of the probe engine.

- qm_space: self-adjoint operators on C^n, PSD cone, Hilbert-Schmidt pairing
- state_bc / effect_bc: operators -> boundary-condition coordinates
- KrausSet / probe_from_kraus: quantum operations as primitive probes
- null_probe_qm: unitary (or Hamiltonian) time evolution as the null-probe
- instrument_probes / observable_probe: measurement branches and observables
- random_* samplers for property tests

Value convention: (P, (b1, b2))_M = tr(b2 E(b1)), first boundary atom initial.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import expm

from probe_helpers.engineLevers import HERMITIAN_TOL, KRAUS_TOL, MEMBERSHIP_TOL, UNITARY_TOL
from .errors import (
    DimensionMismatchError,
    KrausShapeError,
    NonPositiveEffectError,
    NonSelfAdjointError,
    NonUnitaryError,
    RegionMismatchError,
    SpaceMismatchError,
)
from .operator_basis import hermitian_reference_basis, operator_to_coords
from .ordered_linear_core import PSD, BCVector, BoundarySpaceSpec, ConeSpec, SlicePairing
from .probes import Probe, make_probe
from .spacetime_complex import Region, SpacetimeComplex


# =============================================================================
# SPACES AND BOUNDARY CONDITIONS
# =============================================================================

def qm_space(n: int, label: str = "") -> BoundarySpaceSpec:
    """
    Space of self-adjoint operators on an n-dimensional Hilbert space.

    Args:
        n: Hilbert-space dimension (n >= 1)
        label: Space identifier (defaults to "qm<n>")

    Returns:
        Space of dimension n^2 with cone PSD(n) and identity gram
    """
    if n < 1:
        raise DimensionMismatchError(f"Hilbert-space dimension must be >= 1, got {n}")
    basis = hermitian_reference_basis(n)
    return BoundarySpaceSpec(
        dim=n * n,
        cone=ConeSpec.psd(n, basis),
        pairing=SlicePairing.identity(n * n),
        label=label or f"qm{n}",
        backend="quantum",
    )


def hilbert_dim(space: BoundarySpaceSpec) -> int:
    if space.cone.kind != PSD:
        raise SpaceMismatchError(f"space '{space.label}' is not a space of self-adjoint operators")
    return int(space.cone.n)


def as_self_adjoint(space: BoundarySpaceSpec, op, what: str) -> np.ndarray:
    n = hilbert_dim(space)
    op = np.asarray(op, dtype=np.complex128)
    if op.shape != (n, n):
        raise DimensionMismatchError(f"{what} must be {n}x{n} for space '{space.label}', got shape {op.shape}")
    asymmetry = float(np.max(np.abs(op - op.conj().T)))
    if asymmetry > HERMITIAN_TOL:
        raise NonSelfAdjointError(f"{what} is not self-adjoint (asymmetry {asymmetry:.3e})")
    return 0.5 * (op + op.conj().T)


def effect_bc(space: BoundarySpaceSpec, operator) -> BCVector:
    """Coordinates of a self-adjoint operator in the space's reference basis."""
    op = as_self_adjoint(space, operator, "operator")
    return space.vector(operator_to_coords(space.cone.operator_basis, op))


def state_bc(space: BoundarySpaceSpec, density_matrix, tol: float = MEMBERSHIP_TOL) -> BCVector:
    """
    Coordinates of a density matrix; records its trace and whether it is PSD.

    Non-PSD input is accepted (it is still a vector of B_Sigma) but flagged
    with positive=False.
    """
    rho = as_self_adjoint(space, density_matrix, "density matrix")
    positive = bool(np.linalg.eigvalsh(rho).min() >= -tol)
    return space.vector(
        operator_to_coords(space.cone.operator_basis, rho),
        trace=float(np.trace(rho).real),
        positive=positive,
    )


def pure_state(ket) -> np.ndarray:
    """Projector |psi><psi| of a normalised ket."""
    ket = np.asarray(ket, dtype=np.complex128)
    ket = ket / np.linalg.norm(ket)
    return np.outer(ket, ket.conj())


# =============================================================================
# QUANTUM OPERATIONS
# =============================================================================

@dataclass(frozen=True, eq=False)
class KrausSet:
    """Kraus operators K_i (n_out x n_in) of a quantum operation E(r) = sum K r K^dagger."""

    operators: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(np.array(k, dtype=np.complex128) for k in self.operators)
        if not ops:
            raise KrausShapeError("a Kraus set needs at least one operator")
        shape = ops[0].shape
        if len(shape) != 2 or any(k.shape != shape for k in ops):
            raise KrausShapeError(f"Kraus operators must be matrices of one common shape, got {[k.shape for k in ops]}")
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "operators", ops)

    @property
    def n_in(self) -> int:
        return int(self.operators[0].shape[1])

    @property
    def n_out(self) -> int:
        return int(self.operators[0].shape[0])

    @cached_property
    def trace_preserving(self) -> bool:
        total = sum(k.conj().T @ k for k in self.operators)
        return bool(np.max(np.abs(total - np.eye(self.n_in))) <= KRAUS_TOL)

    def apply(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=np.complex128)
        return sum(k @ rho @ k.conj().T for k in self.operators)

    def compose_after(self, first: "KrausSet") -> "KrausSet":
        """Kraus set of self o first (first acts, then self)."""
        if first.n_out != self.n_in:
            raise KrausShapeError(f"cannot follow a channel with output {first.n_out} by one with input {self.n_in}")
        return KrausSet(tuple(b @ a for b in self.operators for a in first.operators))


def two_atom_spaces(cx: SpacetimeComplex, region: Region) -> tuple[BoundarySpaceSpec, BoundarySpaceSpec]:
    region = cx.region(region.region_id)
    if region.arity != 2:
        raise RegionMismatchError(
            f"quantum channel probes need a two-boundary region, '{region.label}' has {region.arity} atoms"
        )
    return cx.space_of(region.boundary[0]), cx.space_of(region.boundary[1])


def probe_from_kraus(cx: SpacetimeComplex, region: Region, ks: KrausSet, label: str = "") -> Probe:
    """
    Primitive probe of a quantum operation on a (initial, final) region.

    T[i, j] = tr(B_j E(B_i)) over the reference bases of the two atoms.
    """
    space_in, space_out = two_atom_spaces(cx, region)
    n_in, n_out = hilbert_dim(space_in), hilbert_dim(space_out)
    if ks.n_in != n_in or ks.n_out != n_out:
        raise KrausShapeError(
            f"Kraus operators are {ks.n_out}x{ks.n_in} but region '{region.label}' maps C^{n_in} to C^{n_out}"
        )
    basis_in = space_in.cone.operator_basis
    basis_out = space_out.cone.operator_basis
    images = np.array([ks.apply(b) for b in basis_in])
    tensor = np.einsum("jab,iba->ij", basis_out, images).real
    return make_probe(cx, region, tensor, primitive=True, label=label)


def check_unitary(matrix, tol: float = UNITARY_TOL) -> np.ndarray:
    u = np.asarray(matrix, dtype=np.complex128)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise NonUnitaryError(f"a unitary must be square, got shape {u.shape}")
    deviation = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))
    if deviation > tol:
        raise NonUnitaryError(f"matrix is not unitary (deviation {deviation:.3e})")
    return u


def null_probe_qm(
    cx: SpacetimeComplex,
    region: Region,
    unitary=None,
    hamiltonian=None,
    duration: float = 1.0,
    label: str = "null",
) -> Probe:
    """
    Null-probe of a time-interval region: the unitary channel r -> U r U^dagger.

    Args:
        unitary: Explicit unitary (identity when neither unitary nor hamiltonian given)
        hamiltonian: Self-adjoint generator; U = exp(-i H duration)
        duration: Evolution time used with hamiltonian
    """
    space_in, _ = two_atom_spaces(cx, region)
    n = hilbert_dim(space_in)
    if unitary is not None and hamiltonian is not None:
        raise ValueError("give either a unitary or a hamiltonian, not both")
    if hamiltonian is not None:
        h = as_self_adjoint(space_in, hamiltonian, "hamiltonian")
        u = expm(-1j * float(duration) * h)
    elif unitary is not None:
        u = check_unitary(unitary)
    else:
        u = np.eye(n, dtype=np.complex128)
    return probe_from_kraus(cx, region, KrausSet((u,)), label=label)


def check_effect(effect: np.ndarray, what: str, bounded: bool = False, tol: float = HERMITIAN_TOL) -> None:
    """Raise unless 0 <= E, and with bounded also E <= I."""
    if np.linalg.eigvalsh(effect).min() < -tol:
        raise NonPositiveEffectError(f"{what} is not positive semidefinite")
    if bounded and np.linalg.eigvalsh(np.eye(effect.shape[0]) - effect).min() < -tol:
        raise NonPositiveEffectError(f"{what} exceeds the identity (I - E is not positive semidefinite)")


def effect_sqrt(effect: np.ndarray) -> np.ndarray:
    # only round-off negatives are left after check_effect
    eigenvalues, eigenvectors = np.linalg.eigh(effect)
    eigenvalues = np.clip(eigenvalues, 0.0, None)
    return (eigenvectors * np.sqrt(eigenvalues)) @ eigenvectors.conj().T


def instrument_probes(
    cx: SpacetimeComplex,
    region: Region,
    effects: Sequence,
    channel: Optional[KrausSet] = None,
) -> list[Probe]:
    """
    Branch probes of a measurement with Lüders Kraus operators sqrt(E_i).

    The optional channel acts before the measurement. Summing the branches
    gives the probe of the apparatus' mere presence.
    """
    space_in, space_out = two_atom_spaces(cx, region)
    probes = []
    for index, effect in enumerate(effects):
        op = as_self_adjoint(space_out, effect, f"effect {index}")
        check_effect(op, f"effect {index}")
        branch = KrausSet((effect_sqrt(op),))
        if channel is not None:
            branch = branch.compose_after(channel)
        probes.append(probe_from_kraus(cx, region, branch, label=f"E{index}"))
    return probes


def observable_probe(
    cx: SpacetimeComplex,
    region: Region,
    observable,
    channel: Optional[KrausSet] = None,
) -> Probe:
    """
    Probe of an observable: spectral-projector branches weighted by eigenvalues.

    With final condition = identity, its value on a state rho is tr(A E(rho)).
    """
    _, space_out = two_atom_spaces(cx, region)
    op = as_self_adjoint(space_out, observable, "observable")
    eigenvalues, eigenvectors = np.linalg.eigh(op)
    projectors = [np.outer(eigenvectors[:, i], eigenvectors[:, i].conj()) for i in range(len(eigenvalues))]
    branches = instrument_probes(cx, region, projectors, channel=channel)
    result = branches[0] * eigenvalues[0]
    for weight, branch in zip(eigenvalues[1:], branches[1:]):
        result = result + branch * weight
    return result.relabel("observable")


# =============================================================================
# RANDOM SAMPLERS
# =============================================================================

def random_pure_state(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random normalised ket in C^n."""
    ket = rng.normal(size=n) + 1j * rng.normal(size=n)
    return ket / np.linalg.norm(ket)


def random_density_matrix(n: int, rng: np.random.Generator, rank: Optional[int] = None) -> np.ndarray:
    """Random unit-trace PSD matrix (Ginibre construction)."""
    rank = n if rank is None else rank
    g = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with phase correction."""
    z = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_kraus_set(n_in: int, rng: np.random.Generator, n_out: Optional[int] = None, n_kraus: int = 2) -> KrausSet:
    """
    Random trace-preserving Kraus set (isometry cut into blocks).

    n_kraus is raised to ceil(n_in / n_out) when needed, since the stacked
    blocks must have at least n_in rows to form an isometry.
    """
    n_out = n_in if n_out is None else n_out
    n_kraus = max(n_kraus, -(-n_in // n_out))
    z =rng.normal(size=(n_out * n_kraus, n_in)) + 1j * rng.normal(size=(n_out * n_kraus, n_in))
    isometry, _ = np.linalg.qr(z)
    return KrausSet(tuple(isometry[i * n_out:(i + 1) * n_out, :] for i in range(n_kraus)))

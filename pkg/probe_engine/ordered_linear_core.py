"""
Ordered Linear Core
===================
Finite-dimensional ordered vector spaces of boundary conditions.

- BCVector: a boundary condition as coordinates in a space's reference basis
- ConeSpec: the positive cone (orthant, PSD, or finitely generated)
- SlicePairing: the symmetric bilinear form given by the slice-region null-probe
- SignedBasis: orthonormal basis with pairing (-1)^sigma(k) delta_kl
- BoundarySpaceSpec: the triple (space, cone, pairing)

All values are immutable after construction and every operation is a pure
function, so instances can be shared between threads.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence, Union

import numpy as np
from scipy.optimize import nnls

from probe_helpers.engineLevers import (
    DEGENERACY_TOL,
    MEMBERSHIP_TOL,
    PSD_RANDOM_SAMPLES,
    PSD_SAMPLE_SEED,
    SIGNED_BASIS_TOL,
    SYMMETRY_TOL,
)
from .errors import (
    AsymmetricPairingError,
    ConeSolverError,
    DegeneratePairingError,
    DimensionMismatchError,
    InvalidBasisError,
    InvalidConeError,
    NonFiniteValueError,
    SpaceMismatchError,
)
from .operator_basis import coords_to_operator, hermitian_reference_basis, operator_to_coords

ORTHANT = "orthant"
PSD = "psd"
GENERATORS = "generators"
CONE_KINDS = (ORTHANT, PSD, GENERATORS)


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


# =============================================================================
# BOUNDARY CONDITIONS
# =============================================================================

@dataclass(frozen=True, eq=False)
class BCVector:
    """
    A boundary condition b in B_Sigma.

    Attributes:
        space_id: Identifier of the owning BoundarySpaceSpec
        coords: Real coordinates in the space's reference basis
        trace: Trace of the operator this vector was built from (quantum states only)
        positive: Result of the PSD check made when the vector was built, if any
    """

    space_id: str
    coords: np.ndarray
    trace: Optional[float] = None
    positive: Optional[bool] = None

    def __post_init__(self):
        coords = _frozen_array(self.coords)
        if coords.ndim != 1:
            raise DimensionMismatchError(
                f"boundary condition coordinates must be a flat list, got shape {coords.shape}"
            )
        if not np.all(np.isfinite(coords)):
            raise NonFiniteValueError(f"boundary condition in '{self.space_id}' has non-finite coordinates")
        object.__setattr__(self, "coords", coords)

    @property
    def dim(self) -> int:
        return int(self.coords.shape[0])

    def _check_compatible(self, other: "BCVector") -> None:
        if other.space_id != self.space_id:
            raise SpaceMismatchError(f"cannot combine vectors of '{self.space_id}' and '{other.space_id}'")
        if other.dim != self.dim:
            raise DimensionMismatchError(f"vector lengths differ: {self.dim} vs {other.dim}")

    def __add__(self, other: "BCVector") -> "BCVector":
        self._check_compatible(other)
        return BCVector(self.space_id, self.coords + other.coords)

    def __sub__(self, other: "BCVector") -> "BCVector":
        self._check_compatible(other)
        return BCVector(self.space_id, self.coords - other.coords)

    def __mul__(self, scalar: float) -> "BCVector":
        return BCVector(self.space_id, self.coords * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "BCVector":
        return BCVector(self.space_id, -self.coords)

    def __repr__(self) -> str:
        return f"BCVector({self.space_id!r}, {np.array2string(self.coords, precision=6)})"


# =============================================================================
# POSITIVE CONES
# =============================================================================

@dataclass(frozen=True, eq=False)
class ConeSpec:
    """
    A machine-checkable positive cone.

    Use the constructors orthant(), psd() and from_generators() rather than
    filling the fields by hand.
    """

    kind: str
    dim: int
    n: Optional[int] = None
    generators: Optional[np.ndarray] = None
    operator_basis: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in CONE_KINDS:
            raise InvalidConeError(f"unknown cone kind '{self.kind}' (expected one of {CONE_KINDS})")
        if self.dim < 1:
            raise InvalidConeError(f"cone dimension must be positive, got {self.dim}")
        if self.kind == PSD:
            if self.n is None or self.n * self.n != self.dim:
                raise InvalidConeError(f"PSD({self.n}) cone needs a space of dimension n^2, got {self.dim}")
            if self.operator_basis is None or self.operator_basis.shape != (self.dim, self.n, self.n):
                raise InvalidConeError("PSD cone needs an operator basis of shape (n^2, n, n)")
        if self.kind == GENERATORS:
            gens = self.generators
            if gens is None or gens.ndim != 2 or gens.shape[0] == 0:
                raise InvalidConeError("a finitely generated cone needs a non-empty generator list")
            if gens.shape[1] != self.dim:
                raise InvalidConeError(f"generators have length {gens.shape[1]}, expected {self.dim}")
            if np.any(np.linalg.norm(gens, axis=1) == 0.0):
                raise InvalidConeError("cone generators must be nonzero")

    @classmethod
    def orthant(cls, dim: int) -> "ConeSpec":
        return cls(ORTHANT, int(dim))

    @classmethod
    def psd(cls, n: int, operator_basis: Optional[np.ndarray] = None) -> "ConeSpec":
        basis = hermitian_reference_basis(n) if operator_basis is None else operator_basis
        return cls(PSD, int(n) * int(n), n=int(n), operator_basis=basis)

    @classmethod
    def from_generators(cls, generators: Sequence[Union[Sequence[float], BCVector]]) -> "ConeSpec":
        rows = [g.coords if isinstance(g, BCVector) else g for g in generators]
        if not rows:
            raise InvalidConeError("a finitely generated cone needs a non-empty generator list")
        gens = _frozen_array(rows)
        if gens.ndim != 2:
            raise InvalidConeError("generators must all have the same length")
        return cls(GENERATORS, int(gens.shape[1]), generators=gens)

    def to_operator(self, coords: np.ndarray) -> np.ndarray:
        """Self-adjoint matrix with the given coordinates (PSD cones only)."""
        op = coords_to_operator(self.operator_basis, coords)
        return 0.5 * (op + op.conj().T)


def _coords_of(v: Union[BCVector, np.ndarray, Sequence[float]], dim: int) -> np.ndarray:
    coords = v.coords if isinstance(v, BCVector) else np.asarray(v, dtype=np.float64)
    if coords.shape != (dim,):
        raise DimensionMismatchError(f"expected a vector of dimension {dim}, got shape {coords.shape}")
    return coords


def cone_contains(cone: ConeSpec, v: Union[BCVector, np.ndarray], tol: float = MEMBERSHIP_TOL) -> bool:
    """
    Membership test v in B+.

    Args:
        cone: The positive cone
        v: Vector (BCVector or raw coordinates) of the cone's dimension
        tol: Slack allowed below zero

    Returns:
        True iff v lies in the cone up to tol
    """
    coords = _coords_of(v, cone.dim)
    if cone.kind == ORTHANT:
        return bool(np.all(coords >= -tol))
    if cone.kind == PSD:
        eigenvalues = np.linalg.eigvalsh(cone.to_operator(coords))
        return bool(eigenvalues.min() >= -tol)

    # Finitely generated: nonnegative least squares on the generator matrix
    try:
        _, residual = nnls(cone.generators.T, coords)
    except RuntimeError as exc:
        raise ConeSolverError(f"generator feasibility solve did not converge: {exc}") from exc
    return bool(residual <= tol * max(1.0, float(np.linalg.norm(coords))))


def cone_le(cone: ConeSpec, u: BCVector, v: BCVector, tol: float = MEMBERSHIP_TOL) -> bool:
    """Partial order u <= v, i.e. v - u in the cone."""
    if u.space_id != v.space_id:
        raise SpaceMismatchError(f"cannot order vectors of '{u.space_id}' and '{v.space_id}'")
    return cone_contains(cone, _coords_of(v, cone.dim) - _coords_of(u, cone.dim), tol=tol)


def _extremal_pure_states(n: int) -> list[np.ndarray]:
    states = []
    for i in range(n):
        ket = np.zeros(n, dtype=np.complex128)
        ket[i] = 1.0
        states.append(ket)
    for i in range(n):
        for j in range(i + 1, n):
            for phase in (1.0, -1.0, 1j, -1j):
                ket = np.zeros(n, dtype=np.complex128)
                ket[i] = 1.0 / np.sqrt(2.0)
                ket[j] = phase / np.sqrt(2.0)
                states.append(ket)
    return states


def cone_generators(
    cone: ConeSpec,
    samples: int = PSD_RANDOM_SAMPLES,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """
    Return rows spanning (or, for PSD, sampling) the extreme rays of a cone.

    ORTHANT and GENERATORS cones are exact. PSD cones get the rank-1 projectors
    onto |i>, (|i> + p|j>)/sqrt(2) for p in {1, -1, i, -i}, followed by
    `samples` random pure-state projectors.
    """
    if cone.kind == ORTHANT:
        return np.eye(cone.dim)
    if cone.kind == GENERATORS:
        return np.array(cone.generators)

    rng = np.random.default_rng(PSD_SAMPLE_SEED) if rng is None else rng
    kets = _extremal_pure_states(cone.n)
    for _ in range(samples):
        ket = rng.normal(size=cone.n) + 1j * rng.normal(size=cone.n)
        kets.append(ket / np.linalg.norm(ket))
    rows = [operator_to_coords(cone.operator_basis, np.outer(ket, ket.conj())) for ket in kets]
    return np.array(rows)


# =============================================================================
# SLICE PAIRING AND SIGNED BASES
# =============================================================================

@dataclass(frozen=True, eq=False)
class SlicePairing:
    """Symmetric bilinear form (b1, b2) -> (null, (b1, b2)) over the reference basis."""

    gram: np.ndarray

    def __post_init__(self):
        gram = np.array(self.gram, dtype=np.float64)
        if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
            raise DimensionMismatchError(f"gram matrix must be square, got shape {gram.shape}")
        if not np.all(np.isfinite(gram)):
            raise NonFiniteValueError("gram matrix has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(gram)))) if gram.size else 1.0
        if np.max(np.abs(gram - gram.T), initial=0.0) > SYMMETRY_TOL * scale:
            raise AsymmetricPairingError("slice pairing gram matrix is not symmetric")
        object.__setattr__(self, "gram", _frozen_array(0.5 * (gram + gram.T)))

    @property
    def dim(self) -> int:
        return int(self.gram.shape[0])

    @classmethod
    def identity(cls, dim: int) -> "SlicePairing":
        return cls(np.eye(dim))


@dataclass(frozen=True, eq=False)
class SignedBasis:
    """
    Orthonormal basis {b_k} of a slice pairing.

    Attributes:
        space_id: Space the basis belongs to
        vectors: Array of shape (dim, dim); row k holds the coordinates of b_k
        signs: sigma(k) in {0, 1}; 0 on the positive-definite part
    """

    space_id: str
    vectors: np.ndarray
    signs: tuple[int, ...]

    def __post_init__(self):
        vectors = _frozen_array(self.vectors)
        signs = tuple(int(s) for s in self.signs)
        if vectors.ndim != 2 or vectors.shape[0] != len(signs):
            raise InvalidBasisError("signed basis needs one sign per vector")
        if any(s not in (0, 1) for s in signs):
            raise InvalidBasisError(f"signs must be 0 or 1, got {signs}")
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "signs", signs)

    @property
    def count(self) -> int:
        return len(self.signs)

    @property
    def sign_factors(self) -> np.ndarray:
        """(-1)^sigma(k) for every k."""
        return np.where(np.array(self.signs) == 0, 1.0, -1.0)

    @property
    def signature(self) -> int:
        """Number of basis vectors on the negative-definite part."""
        return int(sum(self.signs))

    def as_vectors(self) -> list[BCVector]:
        return [BCVector(self.space_id, row) for row in self.vectors]

    def contraction_kernel(self) -> np.ndarray:
        """K = sum_k (-1)^sigma(k) b_k b_k^T, the interface kernel of the composition rule."""
        return np.einsum("k,ki,kj->ij", self.sign_factors, self.vectors, self.vectors)


# =============================================================================
# BOUNDARY SPACES
# =============================================================================

@dataclass(frozen=True, eq=False)
class BoundarySpaceSpec:
    """
    The triple (B_Sigma, B+_Sigma, slice pairing) for one kind of hypersurface.

    Attributes:
        dim: Dimension of B_Sigma
        cone: Positive cone B+_Sigma
        pairing: Slice pairing over the reference basis
        label: Identifier of the space (used as space_id)
        basis_labels: Optional names of the reference basis vectors (e.g. classical states)
        backend: "quantum", "classical" or "generic"
    """

    dim: int
    cone: ConeSpec
    pairing: SlicePairing
    label: str
    basis_labels: Optional[tuple[str, ...]] = None
    backend: str = "generic"

    def __post_init__(self):
        if self.dim < 1:
            raise DimensionMismatchError(f"space '{self.label}' must have positive dimension, got {self.dim}")
        if self.cone.dim != self.dim:
            raise DimensionMismatchError(
                f"space '{self.label}' has dimension {self.dim} but its cone has dimension {self.cone.dim}"
            )
        if self.pairing.dim != self.dim:
            raise DimensionMismatchError(
                f"space '{self.label}' has dimension {self.dim} but its pairing has dimension {self.pairing.dim}"
            )
        if self.basis_labels is not None:
            labels = tuple(str(x) for x in self.basis_labels)
            if len(labels) != self.dim:
                raise DimensionMismatchError(f"space '{self.label}' needs {self.dim} basis labels, got {len(labels)}")
            object.__setattr__(self, "basis_labels", labels)

    @property
    def space_id(self) -> str:
        return self.label

    @cached_property
    def signed_basis(self) -> SignedBasis:
        """Signed orthonormal basis, computed once on first use."""
        return orthonormalize(self)

    def vector(self, coords: Sequence[float], **meta) -> BCVector:
        vec = BCVector(self.space_id, coords, **meta)
        if vec.dim != self.dim:
            raise DimensionMismatchError(f"space '{self.label}' has dimension {self.dim}, got {vec.dim} coordinates")
        return vec

    def zero(self) -> BCVector:
        return BCVector(self.space_id, np.zeros(self.dim))

    def basis_vector(self, index: int) -> BCVector:
        coords = np.zeros(self.dim)
        coords[index] = 1.0
        return BCVector(self.space_id, coords)

    def index_of(self, basis_label: str) -> int:
        if self.basis_labels is None or basis_label not in self.basis_labels:
            raise LookupError(f"space '{self.label}' has no basis vector named '{basis_label}'")
        return self.basis_labels.index(basis_label)

    def check(self, v: BCVector) -> BCVector:
        """Raise unless v belongs to this space."""
        if v.space_id != self.space_id:
            raise SpaceMismatchError(f"vector belongs to '{v.space_id}', expected '{self.space_id}'")
        if v.dim != self.dim:
            raise DimensionMismatchError(f"space '{self.label}' has dimension {self.dim}, got {v.dim}")
        return v


def generic_space(
    label: str,
    gram: Union[np.ndarray, Sequence[Sequence[float]]],
    cone: Union[str, ConeSpec] = ORTHANT,
    generators: Optional[Sequence[Sequence[float]]] = None,
    basis_labels: Optional[Sequence[str]] = None,
) -> BoundarySpaceSpec:
    """
    Build a space with an arbitrary symmetric slice pairing.

    Args:
        label: Space identifier
        gram: Symmetric gram matrix (may be indefinite)
        cone: ConeSpec, or "orthant" / "psd" / "generators"
        generators: Generator rows when cone == "generators"
        basis_labels: Optional names of the reference basis vectors
    """
    pairing = SlicePairing(gram)
    dim = pairing.dim
    if isinstance(cone, str):
        if cone == ORTHANT:
            cone = ConeSpec.orthant(dim)
        elif cone == PSD:
            n = int(round(np.sqrt(dim)))
            cone = ConeSpec.psd(n)
        elif cone == GENERATORS:
            cone = ConeSpec.from_generators(generators or [])
        else:
            raise InvalidConeError(f"unknown cone kind '{cone}'")
    labels = tuple(basis_labels) if basis_labels is not None else None
    return BoundarySpaceSpec(dim, cone, pairing, label, basis_labels=labels)


def pairing_eval(space: BoundarySpaceSpec, u: BCVector, v: BCVector) -> float:
    """Slice-region value u^T G v."""
    space.check(u)
    space.check(v)
    return float(u.coords @ space.pairing.gram @ v.coords)


def orthonormalize(space: BoundarySpaceSpec, tol: float = DEGENERACY_TOL) -> SignedBasis:
    """
    Signed orthonormal basis of the slice pairing.

    Eigenvectors of the gram matrix are scaled by 1/sqrt(|lambda|); the
    positive-definite part comes first (sigma=0), then the negative part
    (sigma=1). Each vector's largest-magnitude coordinate is made positive.

    Raises:
        DegeneratePairingError: some |lambda| < tol * max|lambda|
    """
    eigenvalues, eigenvectors = np.linalg.eigh(space.pairing.gram)
    scale = float(np.max(np.abs(eigenvalues)))
    if scale == 0.0 or np.any(np.abs(eigenvalues) < tol * scale):
        raise DegeneratePairingError(
            f"slice pairing of '{space.label}' is degenerate (eigenvalues {np.round(eigenvalues, 12).tolist()})"
        )

    order = [i for i in range(space.dim) if eigenvalues[i] > 0] + [i for i in range(space.dim) if eigenvalues[i] < 0]
    vectors = []
    signs = []
    for idx in order:
        vec = eigenvectors[:, idx] / np.sqrt(abs(eigenvalues[idx]))
        pivot = int(np.argmax(np.abs(vec)))
        if vec[pivot] < 0:
            vec = -vec
        vectors.append(vec)
        signs.append(0 if eigenvalues[idx] > 0 else 1)
    return SignedBasis(space.space_id, np.array(vectors), tuple(signs))


def validate_signed_basis(space: BoundarySpaceSpec, basis: SignedBasis, tol: float = SIGNED_BASIS_TOL) -> SignedBasis:
    """Raise InvalidBasisError unless pairing(b_k, b_l) = (-1)^sigma(k) delta_kl."""
    if basis.space_id != space.space_id:
        raise SpaceMismatchError(f"basis belongs to '{basis.space_id}', expected '{space.space_id}'")
    if basis.count != space.dim or basis.vectors.shape[1] != space.dim:
        raise InvalidBasisError(f"signed basis of '{space.label}' needs {space.dim} vectors of length {space.dim}")
    products = basis.vectors @ space.pairing.gram @ basis.vectors.T
    deviation = float(np.max(np.abs(products - np.diag(basis.sign_factors))))
    if deviation > tol:
        raise InvalidBasisError(f"basis is not signed-orthonormal for '{space.label}' (deviation {deviation:.3e})")
    return basis


def rotate_signed_basis(space: BoundarySpaceSpec, basis: SignedBasis, rotation: np.ndarray) -> SignedBasis:
    """
    Apply a change of basis b'_k = sum_l R_kl b_l and validate the result.

    R must preserve the sign form (e.g. an orthogonal rotation acting only
    inside the positive-definite block).
    """
    rotated = SignedBasis(basis.space_id, np.asarray(rotation, dtype=np.float64) @ basis.vectors, basis.signs)
    return validate_signed_basis(space, rotated)


def reconstruct_gram(basis: SignedBasis) -> np.ndarray:
    """Gram matrix recovered from a signed basis: G = B^-1 S B^-T."""
    inverse = np.linalg.inv(basis.vectors)
    return inverse @ np.diag(basis.sign_factors) @ inverse.T

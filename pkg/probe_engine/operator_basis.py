"""
Operator Basis Module
=====================
Trace-orthonormal bases of self-adjoint n x n matrices and coordinate maps.

The reference ordering is: identity/sqrt(n), then for every pair j<k the
symmetric and antisymmetric off-diagonal elements, then the n-1 traceless
diagonal elements. Every element B satisfies tr(B_i B_j) = delta_ij.
"""

from functools import lru_cache

import numpy as np


def off_diagonal_pair(j: int, k: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Return the normalised symmetric and antisymmetric elements for indices j<k.

    Args:
        j: Row index (0-based)
        k: Column index (0-based), k > j
        n: Matrix dimension

    Returns:
        Tuple of (symmetric, antisymmetric) complex n x n matrices
    """
    sym = np.zeros((n, n), dtype=np.complex128)
    sym[j, k] = sym[k, j] = 1.0 / np.sqrt(2.0)
    asym = np.zeros((n, n), dtype=np.complex128)
    asym[j, k] = -1j / np.sqrt(2.0)
    asym[k, j] = 1j / np.sqrt(2.0)
    return sym, asym


def diagonal_element(level: int, n: int) -> np.ndarray:
    """
    Return the normalised traceless diagonal element of the given level.

    Level l (1 <= l <= n-1) has entries 1 on the first l diagonal slots and -l
    on slot l, scaled to unit Hilbert-Schmidt norm.
    """
    diag = np.zeros(n, dtype=np.complex128)
    diag[:level] = 1.0
    diag[level] = -float(level)
    diag /= np.sqrt(level * (level + 1))
    return np.diag(diag)


@lru_cache(maxsize=None)
def _cached_basis(n: int) -> np.ndarray:
    elements = [np.eye(n, dtype=np.complex128) / np.sqrt(n)]
    for j in range(n):
        for k in range(j + 1, n):
            elements.extend(off_diagonal_pair(j, k, n))
    for level in range(1, n):
        elements.append(diagonal_element(level, n))
    stacked = np.array(elements)
    stacked.setflags(write=False)
    return stacked


def hermitian_reference_basis(n: int) -> np.ndarray:
    """
    Return the reference basis of self-adjoint n x n matrices.

    Args:
        n: Hilbert-space dimension (n >= 1)

    Returns:
        Read-only array of shape (n*n, n, n)
    """
    if n < 1:
        raise ValueError(f"Hilbert-space dimension must be >= 1, got {n}")
    return _cached_basis(int(n))


def operator_to_coords(basis: np.ndarray, op: np.ndarray) -> np.ndarray:
    """Coordinates c_i = tr(B_i op) of a self-adjoint operator (real part)."""
    return np.einsum("kij,ji->k", basis, op).real


def coords_to_operator(basis: np.ndarray, coords: np.ndarray) -> np.ndarray:
    """Rebuild sum_i c_i B_i from coordinates."""
    return np.einsum("k,kij->ij", np.asarray(coords, dtype=np.float64), basis)

"""Dense complex matrix substrate.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``. The
helpers here add the shape checks and the Hermitian eigensolver contract
(descending eigenvalues, tolerance-checked input) the rest of the package
relies on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NegativeEigenvalue, NotHermitian

HERMITIAN_TOL = 1e-10
RANK_REL_TOL = 1e-10


def as_matrix(m) -> np.ndarray:
    """Return ``m`` as a square, finite complex128 matrix."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DimensionMismatch("matrix has non-finite entries")
    return a


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=np.complex128)


def dagger(m) -> np.ndarray:
    return as_matrix(m).conj().T


def conjugate(m) -> np.ndarray:
    return as_matrix(m).conj()


def trace(m) -> complex:
    return complex(np.trace(as_matrix(m)))


def matmul(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def hermiticity_error(m: np.ndarray) -> float:
    """Largest entrywise ``|m - m^dagger|``."""
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenpairs of a Hermitian matrix, eigenvalues in descending order.

    ``vectors[:, k]`` is the unit eigenvector for ``values[k]``.
    """

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T


def eigh(m, tol: float = HERMITIAN_TOL) -> EigenDecomposition:
    """Hermitian eigendecomposition with descending eigenvalues.

    Raises NotHermitian when ``max |m - m^dagger|`` exceeds ``tol``. The input
    is symmetrized before LAPACK sees it, so the result depends on the whole
    matrix rather than on one triangle.
    """
    a = as_matrix(m)
    err = hermiticity_error(a)
    if err > tol:
        raise NotHermitian(f"max |m - m^dagger| = {err:.3e} exceeds {tol:.1e}")
    w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    w = w[::-1].copy()
    v = v[:, ::-1].copy()
    w.setflags(write=False)
    v.setflags(write=False)
    return EigenDecomposition(w, v)


def numerical_rank(e, rel_tol: float = RANK_REL_TOL) -> int:
    """Count eigenvalues strictly above ``rel_tol * max(values)``.

    Accepts an EigenDecomposition or a bare sequence of eigenvalues.
    """
    values = np.asarray(e.values if isinstance(e, EigenDecomposition) else e, dtype=float)
    cutoff = rel_tol * float(np.max(values))
    if np.any(values < -cutoff):
        raise NegativeEigenvalue(
            f"eigenvalue {float(np.min(values)):.3e} below -{cutoff:.1e}"
        )
    return int(np.count_nonzero(values > cutoff))

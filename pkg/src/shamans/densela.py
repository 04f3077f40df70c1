"""Dense linear-algebra kernels shared by the solvers.

Matrices are 2-D float64 numpy arrays kept in Fortran (column-major) order,
so per-column access, the dominant pattern here, is contiguous.  Index sets
are strictly increasing 1-D int64 arrays of 0-based indices.  Everything is
treated as immutable after construction; all functions are pure.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg.lapack import dpotrs

from .errors import IndexOutOfRange, NonFiniteEntry, SingularSystem

# Relative floor under which a Cholesky pivot means a rank-deficient support.
PIVOT_FLOOR = 1e-12


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and convert to a 2-D float64 column-major array."""
    out = np.asfortranarray(a, dtype=np.float64)
    if out.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={out.ndim}")
    if not np.all(np.isfinite(out)):
        raise NonFiniteEntry(f"{name} contains NaN or infinite entries")
    return out


def as_vector(a, name: str = "vector") -> np.ndarray:
    """Validate and convert to a 1-D float64 array."""
    out = np.ascontiguousarray(a, dtype=np.float64)
    if out.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got ndim={out.ndim}")
    if not np.all(np.isfinite(out)):
        raise NonFiniteEntry(f"{name} contains NaN or infinite entries")
    return out


def as_index_set(ids, dim: int, name: str = "index set") -> np.ndarray:
    """Validate a strictly increasing set of 0-based indices below ``dim``."""
    out = np.asarray(ids, dtype=np.int64).ravel()
    if out.size:
        if out.min() < 0 or out.max() >= dim:
            raise IndexOutOfRange(f"{name} addresses outside [0, {dim})")
        if np.any(np.diff(out) <= 0):
            raise IndexOutOfRange(f"{name} must be strictly increasing")
    return out


def complement(idx: np.ndarray, dim: int) -> np.ndarray:
    """Sorted complement of an index set within range(dim)."""
    mask = np.ones(dim, dtype=bool)
    mask[idx] = False
    return np.flatnonzero(mask)


def gram(A: np.ndarray) -> np.ndarray:
    """Gram matrix A.T @ A, symmetrized so S == S.T holds exactly.

    Computed once per dictionary and shared by every column subproblem.
    """
    S = A.T @ A
    return np.asfortranarray((S + S.T) * 0.5)


def spd_factor(S: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor of a symmetric positive definite matrix.

    Raises SingularSystem when the factorization breaks down or any pivot
    falls below PIVOT_FLOOR times the largest diagonal entry, so a
    rank-deficient support surfaces as an error instead of silent
    regularization.
    """
    try:
        L = np.linalg.cholesky(S)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"factorization failed: {exc}") from exc
    d = np.diagonal(L)
    floor = PIVOT_FLOOR * float(np.diagonal(S).max(initial=0.0))
    # diagonal(L)**2 are the elimination pivots of the unpivoted factorization
    if d.size and float((d * d).min()) < floor:
        raise SingularSystem("factorization pivot below relative floor")
    return L


def spd_solve_factored(L: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve S x = rhs given the lower Cholesky factor of S."""
    if L.shape[0] == 0:
        return np.zeros_like(rhs)
    x, info = dpotrs(L, rhs, lower=1)
    if info != 0:
        raise SingularSystem(f"triangular solve failed (info={info})")
    return x


def solve_spd(S: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve S x = rhs for symmetric positive definite S."""
    return spd_solve_factored(spd_factor(S), rhs)


def submatrix(S: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Extract S[rows, cols] for two index sets."""
    rows = as_index_set(rows, S.shape[0], "row set")
    cols = as_index_set(cols, S.shape[1], "column set")
    return S[np.ix_(rows, cols)]


def frob_norm(A: np.ndarray) -> float:
    """Square root of the sum of squared entries."""
    return float(np.sqrt(np.sum(np.square(A, dtype=np.float64))))

"""Regularization path of the L1-penalized NNLS problem for one right-hand side.

For min 0.5 ||Ax - b||^2 + lambda ||x||_1 with x >= 0, the optimal support
is piecewise constant in lambda.  Walking lambda from lambda_max (above
which x = 0 is optimal) down to 0, the support changes one index at a time
at a finite set of breakpoints.  On the interval where a support K is
optimal, the penalized solution is linear in lambda:

    x(K) = a_K - lambda * b_K,   a_K = P(K,K)^-1 ell(K),  b_K = P(K,K)^-1 e,

with P = A.T A and ell = A.T b.  The interval ends at the largest lambda
where either some x(K) component hits zero (that index leaves) or some
complement gradient component

    c_K - lambda * d_K,  c_K = P(Kbar,K) a_K - ell(Kbar),
                         d_K = P(Kbar,K) b_K - e

hits zero (that index enters).  Each recorded entry pairs a support with
the breakpoint at which it stops being optimal, together with the unbiased
(penalty-free) least-squares refit on that support.  The first entry is
always the zero solution at lambda_max and the last entry sits at
lambda = 0 with the unconstrained NNLS solution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import densela
from .densela import as_matrix, as_vector, complement, spd_factor, spd_solve_factored
from .errors import IterationLimit, SingularSystem
from .nnls import nnls_gram

LEAVE = "leave"
ENTER = "enter"
TERMINATE = "terminate"


@dataclass(frozen=True)
class PathEntry:
    """One breakpoint of the path.

    ``lam`` is the penalty value at which ``support`` stops being optimal
    (the lower end of its optimality interval).  ``solution`` is the
    unbiased refit on the support, zero elsewhere; ``error_sq`` its
    residual ||A x - b||^2 against the original system.  ``coeff_a`` and
    ``coeff_b`` reproduce the biased solution on the support as
    a - lambda * b for any lambda inside the interval.  ``cardinality``
    counts the nonzeros of ``solution``.
    """

    lam: float
    support: np.ndarray
    solution: np.ndarray
    error_sq: float
    cardinality: int
    coeff_a: np.ndarray
    coeff_b: np.ndarray


@dataclass
class RegularizationPath:
    """Ordered breakpoint entries, lambda nonincreasing from lambda_max to 0.

    ``truncated`` marks a path that ended early on a rank-deficient
    support or was rebuilt from a plain NNLS fallback; its terminal entry
    is still a valid feasible solution.
    """

    entries: list[PathEntry] = field(default_factory=list)
    truncated: bool = False

    def terminal(self) -> PathEntry:
        return self.entries[-1]


def lambda_max(ell: np.ndarray):
    """Smallest penalty for which the zero vector is optimal.

    Returns (lambda_max, entering index).  The index is the smallest
    maximizer of ell; when every correlation is nonpositive the zero
    vector is optimal for all penalties and (0.0, None) is returned.
    """
    ell = np.asarray(ell, dtype=np.float64)
    if ell.size == 0:
        return 0.0, None
    i = int(np.argmax(ell))  # first maximum: smallest-index tie rule
    lam = float(ell[i])
    if lam <= 0.0:
        return 0.0, None
    return lam, i


def path_coefficients(P: np.ndarray, ell: np.ndarray, K: np.ndarray):
    """Support and complement coefficients (a_K, b_K, c_K, d_K) for K.

    a_K - lambda * b_K is the penalized solution on K; c_K - lambda * d_K
    the gradient on the complement.  Raises SingularSystem when P(K,K) is
    numerically rank deficient; callers must treat the support as
    degenerate.
    """
    r = ell.shape[0]
    K = np.asarray(K, dtype=np.int64)
    if K.size == 0:
        raise ValueError("support must be nonempty")
    L = spd_factor(P[np.ix_(K, K)])
    rhs = np.empty((K.size, 2), order="F")
    rhs[:, 0] = ell[K]
    rhs[:, 1] = 1.0
    ab = spd_solve_factored(L, rhs)
    a_K = np.ascontiguousarray(ab[:, 0])
    b_K = np.ascontiguousarray(ab[:, 1])
    Kbar = complement(K, r)
    # Complement blocks via full-space products: pad, multiply, slice.
    xa = np.zeros(r)
    xa[K] = a_K
    xb = np.zeros(r)
    xb[K] = b_K
    c_K = (P @ xa - ell)[Kbar]
    d_K = (P @ xb)[Kbar] - 1.0
    return a_K, b_K, c_K, d_K


def next_breakpoint(a_K, b_K, c_K, d_K, lambda_current: float, tol: float):
    """Largest penalty below ``lambda_current`` where the support changes.

    Returns (lambda_next, (kind, position)) with kind one of LEAVE, ENTER
    or TERMINATE.  Positions index into a_K/b_K for LEAVE and into
    c_K/d_K for ENTER; with both sets kept ascending this realizes the
    smallest-index tie rule.  A LEAVE candidate needs b_K < -tol, an ENTER
    candidate d_K < -tol; when no candidate has a positive crossing the
    support stays optimal all the way down and (0.0, TERMINATE) is
    returned.  Exact ties between the two cases resolve to LEAVE.
    """
    lam_leave = -np.inf
    pos_leave = -1
    mask = b_K < -tol
    if mask.any():
        ratios = a_K[mask] / b_K[mask]
        best = int(np.argmax(ratios))
        lam_leave = float(ratios[best])
        pos_leave = int(np.flatnonzero(mask)[best])

    lam_enter = -np.inf
    pos_enter = -1
    mask = d_K < -tol
    if mask.any():
        ratios = c_K[mask] / d_K[mask]
        best = int(np.argmax(ratios))
        lam_enter = float(ratios[best])
        pos_enter = int(np.flatnonzero(mask)[best])

    if max(lam_leave, lam_enter) <= 0.0:
        return 0.0, (TERMINATE, None)
    if lam_leave >= lam_enter:
        kind, pos, lam = LEAVE, pos_leave, lam_leave
    else:
        kind, pos, lam = ENTER, pos_enter, lam_enter
    # Roundoff can push the ratio marginally above the current breakpoint;
    # treat that as a tie at lambda_current.
    return min(lam, lambda_current), (kind, pos)


def unbias(P: np.ndarray, ell: np.ndarray, K: np.ndarray, A: np.ndarray,
           b: np.ndarray, tol: float = 1e-10):
    """Penalty-free least-squares refit on the support K.

    Uses a_K when it is componentwise nonnegative; otherwise falls back
    to the active-set solver restricted to K.  The returned error is
    ||A x - b||^2 against the original system.
    """
    r = ell.shape[0]
    x = np.zeros(r)
    K = np.asarray(K, dtype=np.int64)
    if K.size:
        S = P[np.ix_(K, K)]
        a_K = densela.solve_spd(S, ell[K])
        if a_K.min() >= 0.0:
            x[K] = a_K
        else:
            x[K] = nnls_gram(S, ell[K], tol=tol)
    resid = A @ x - b
    return x, float(resid @ resid)


def regularization_path(A, b, tol: float = 1e-10, max_breakpoints: int | None = None,
                        gram_matrix=None, corr=None) -> RegularizationPath:
    """Compute every breakpoint of the L1-penalized NNLS path for (A, b).

    Parameters
    ----------
    A : (m, r) array
        Dictionary.
    b : (m,) array
        Right-hand side.
    tol : float
        Base tolerance; negativity thresholds are scaled by (1 + max|P|)
        so ratios never divide by a near-zero coefficient.
    max_breakpoints : int, optional
        Safety cap on path length, default 50 r.  Exceeding it raises
        IterationLimit (pathological cycling); callers may fall back to a
        single NNLS solve.
    gram_matrix, corr : arrays, optional
        Precomputed A.T A and A.T b shared across many right-hand sides.

    Returns
    -------
    RegularizationPath
        First entry (lambda_max, empty support, 0, ||b||^2); consecutive
        supports differ by one index; the last entry sits at lambda = 0
        and matches the unconstrained active-set NNLS solution.  On a
        rank-deficient support the most recently entered index is dropped
        and the path ends at the last sound entry with ``truncated`` set.
    """
    A = as_matrix(A, "A")
    b = as_vector(b, "b")
    if A.shape[0] != b.shape[0]:
        raise ValueError(f"A has {A.shape[0]} rows but b has {b.shape[0]}")
    P = densela.gram(A) if gram_matrix is None else gram_matrix
    ell = A.T @ b if corr is None else np.asarray(corr, dtype=np.float64)
    r = ell.shape[0]
    if max_breakpoints is None:
        max_breakpoints = 50 * r

    tol_neg = tol * (1.0 + float(np.abs(P).max(initial=0.0)))
    lam0, first = lambda_max(ell)
    tol_lam = tol * (1.0 + lam0)
    zero = np.zeros(r)
    none_idx = np.empty(0, dtype=np.int64)
    coeff0 = np.empty(0)
    entries = [PathEntry(lam0, none_idx, zero, float(b @ b), 0, coeff0, coeff0)]
    if first is None:
        return RegularizationPath(entries)

    K = np.array([first], dtype=np.int64)
    Kbar = complement(K, r)
    lam = lam0
    truncated = False

    while True:
        if len(entries) > max_breakpoints:
            raise IterationLimit(f"path exceeded {max_breakpoints} breakpoints")
        try:
            a_K, b_K, c_K, d_K = path_coefficients(P, ell, K)
        except SingularSystem:
            truncated = True
            break
        lam_next, (kind, pos) = next_breakpoint(a_K, b_K, c_K, d_K, lam, tol_neg)

        # Unbiased refit for the support that was optimal on [lam_next, lam].
        x = np.zeros(r)
        if a_K.min() >= 0.0:
            x[K] = a_K
        else:
            x[K] = nnls_gram(P[np.ix_(K, K)], ell[K], tol=tol)
        resid = A @ x - b
        err = float(resid @ resid)
        if lam_next <= tol_lam:
            lam_next = 0.0
        entries.append(PathEntry(lam_next, K, x, err,
                                 int(np.count_nonzero(x)), a_K, b_K))
        if kind == TERMINATE or lam_next == 0.0:
            break
        if kind == LEAVE:
            idx = int(K[pos])
            K = np.delete(K, pos)
            Kbar = np.insert(Kbar, int(np.searchsorted(Kbar, idx)), idx)
        else:
            idx = int(Kbar[pos])
            Kbar = np.delete(Kbar, pos)
            K = np.insert(K, int(np.searchsorted(K, idx)), idx)
        lam = lam_next

    return RegularizationPath(entries, truncated=truncated)

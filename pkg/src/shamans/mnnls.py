"""End-to-end solve of sparse multiple right-hand-sides NNLS.

Given data M (m x n) and dictionary W (m x r), compute H >= 0 minimizing
||M - WH||_F under one of three regimes: a global nonzero budget spread
across columns (shamans), a fixed per-column sparsity (ksparse), or no
sparsity constraint at all (unconstrained).  The Gram matrix W.T W and the
correlations W.T M are computed once and shared by all per-column path
workers; selection runs single-threaded afterwards.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import selector
from .densela import as_matrix, frob_norm, gram
from .errors import (DimensionMismatch, IterationLimit, ZeroColumnInDictionary,
                     ZeroDataMatrix)
from .homotopy import PathEntry, RegularizationPath, regularization_path
from .nnls import nnls_active_set

MODES = ("shamans", "ksparse", "unconstrained")


@dataclass
class SolveConfig:
    """Solve mode and numerical knobs.

    Exactly one of ``q`` (total nonzero budget, shamans mode) or ``k``
    (per-column sparsity, ksparse mode) applies.  ``zero_threshold`` only
    affects sparsity reporting, never the solve itself.  ``strict_budget``
    forbids the final selection step from overshooting q.
    """

    mode: str = "shamans"
    q: int | None = None
    k: int | None = None
    tol: float = 1e-10
    zero_threshold: float = 1e-3
    strict_budget: bool = False
    max_breakpoints: int | None = None
    parallel: bool = False
    threads: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}, expected one of {MODES}")
        if self.mode == "shamans" and (self.q is None or self.q < 0):
            raise ValueError("shamans mode needs a nonnegative budget q")
        if self.mode == "ksparse" and (self.k is None or self.k < 0):
            raise ValueError("ksparse mode needs a nonnegative per-column k")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass
class UnmixReport:
    """Quality and cost summary of one solve."""

    rel_error: float
    avg_sparsity: float
    nnz: int
    per_column_sparsity: list
    elapsed_path_ms: float = 0.0
    elapsed_select_ms: float = 0.0
    mode: str | None = None
    budget: int | None = None
    fallback_columns: list = field(default_factory=list)


def metrics(M, W, H, zero_threshold: float = 1e-3) -> UnmixReport:
    """Relative Frobenius error and sparsity statistics of a solution.

    ``avg_sparsity`` and the per-column histogram count entries above
    ``zero_threshold``; ``nnz`` counts exact nonzeros.
    """
    M = as_matrix(M, "M")
    W = as_matrix(W, "W")
    H = as_matrix(H, "H")
    denom = frob_norm(M)
    if denom == 0.0:
        raise ZeroDataMatrix("data matrix is identically zero")
    r, n = H.shape
    rel = frob_norm(M - W @ H) / denom
    counts = (H > zero_threshold).sum(axis=0)
    hist = np.bincount(counts, minlength=r + 1)
    return UnmixReport(
        rel_error=float(rel),
        avg_sparsity=float(counts.sum()) / n,
        nnz=int(np.count_nonzero(H)),
        per_column_sparsity=[int(c) for c in hist],
    )


def _fallback_path(W, b, P, ell, tol) -> RegularizationPath:
    """Two-entry path (zero solution, plain NNLS solution) for a column
    whose homotopy hit the breakpoint limit."""
    r = ell.shape[0]
    sol = nnls_active_set(W, b, tol=tol, gram_matrix=P, corr=ell)
    zero = PathEntry(max(float(ell.max(initial=0.0)), 0.0),
                     np.empty(0, dtype=np.int64), np.zeros(r), float(b @ b),
                     0, np.empty(0), np.empty(0))
    final = PathEntry(0.0, sol.support, sol.x, sol.residual_sq,
                      int(sol.support.size), sol.x[sol.support],
                      np.zeros(sol.support.size))
    return RegularizationPath([zero, final], truncated=True)


def solve(M, W, cfg: SolveConfig):
    """Solve for H >= 0 under the configured sparsity regime.

    Returns (H, report).  Columns whose path exceeds the breakpoint limit
    fall back to a plain NNLS solve and are listed in
    ``report.fallback_columns`` instead of aborting the whole run.
    """
    M = as_matrix(M, "M")
    W = as_matrix(W, "W")
    if M.shape[0] != W.shape[0]:
        raise DimensionMismatch(
            f"M has {M.shape[0]} rows but W has {W.shape[0]}")
    m, n = M.shape
    r = W.shape[1]
    if n == 0 or r == 0:
        raise DimensionMismatch("M and W must be nonempty")
    if not np.all((W * W).sum(axis=0) > 0.0):
        raise ZeroColumnInDictionary("dictionary has an all-zero column")
    if cfg.mode == "shamans" and cfg.q > r * n:
        raise ValueError(f"budget q={cfg.q} exceeds r*n={r * n}")
    if cfg.mode == "ksparse" and cfg.k > r:
        raise ValueError(f"k={cfg.k} exceeds the dictionary size r={r}")

    P = gram(W)
    L = W.T @ M
    fallbacks = []

    def run_column(j: int) -> RegularizationPath:
        b = M[:, j]
        ell = L[:, j]
        try:
            return regularization_path(W, b, tol=cfg.tol,
                                       max_breakpoints=cfg.max_breakpoints,
                                       gram_matrix=P, corr=ell)
        except IterationLimit:
            fallbacks.append(j)
            try:
                return _fallback_path(W, b, P, ell, cfg.tol)
            except IterationLimit as exc:
                exc.column = j
                raise

    t0 = time.perf_counter()
    if cfg.parallel:
        workers = cfg.threads if cfg.threads > 0 else (os.cpu_count() or 1)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            paths = list(pool.map(run_column, range(n)))
    else:
        paths = [run_column(j) for j in range(n)]
    t1 = time.perf_counter()

    if cfg.mode == "unconstrained":
        H = np.zeros((r, n), order="F")
        for j in range(n):
            H[:, j] = paths[j].terminal().solution
        budget = None
    elif cfg.mode == "ksparse":
        tables = selector.build_cost_tables(paths, r, n)
        H = selector.assemble(tables, np.full(n, cfg.k, dtype=np.int64))
        budget = cfg.k
    else:
        tables = selector.build_cost_tables(paths, r, n)
        selector.delta_cost(tables)
        state = selector.init_gain(tables)
        cursors = selector.select(state, tables, cfg.q, strict=cfg.strict_budget)
        H = selector.assemble(tables, cursors)
        budget = cfg.q
    t2 = time.perf_counter()

    report = metrics(M, W, H, zero_threshold=cfg.zero_threshold)
    report.elapsed_path_ms = (t1 - t0) * 1e3
    report.elapsed_select_ms = (t2 - t1) * 1e3
    report.mode = cfg.mode
    report.budget = budget
    report.fallback_columns = sorted(fallbacks)
    return H, report

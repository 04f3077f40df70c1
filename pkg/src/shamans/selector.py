"""Budgeted selection of one path solution per column.

From per-column regularization paths, build a cost table C whose entry
(k, j) is the best known error of a solution for column j with at most k
nonzeros, then spend a global nonzero budget greedily: at every step pick
the cursor advance with the largest error decrease per added nonzero.
Because columns do not interact in the objective, the greedy selection is
optimal at every total it reaches among the tabled solutions.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .errors import MissingZeroEntry
from .homotopy import RegularizationPath


@dataclass
class CostTables:
    """Per-column, per-sparsity-level costs and solutions.

    ``cost`` has r+1 rows for sparsity levels 0..r and is nonincreasing
    down each column; ``sols[k][j]`` is the solution behind cost[k, j]
    (at most k nonzeros).  ``delta[k-1, j] = cost[k-1, j] - cost[k, j]``
    is filled by delta_cost.  ``present[k, j]`` marks cells won by a path
    entry of cardinality exactly k, as opposed to values propagated down
    from sparser entries.
    """

    cost: np.ndarray
    sols: list
    present: np.ndarray
    delta: np.ndarray | None = None

    @property
    def levels(self) -> int:
        return self.cost.shape[0] - 1

    @property
    def columns(self) -> int:
        return self.cost.shape[1]


@dataclass
class SelectionState:
    """Mutable state of the greedy budget loop.

    ``cursors[j]`` is the sparsity level currently selected for column j;
    ``gain[i, j]`` the mean error decrease per nonzero of advancing column
    j's cursor to level i+1.  ``heap`` holds (-gain, column, row, version)
    candidates with lazy invalidation; ``version[j]`` stamps the latest
    rebuild of column j so stale heap entries are skipped.
    """

    cursors: np.ndarray
    gain: np.ndarray
    nnz_total: int
    heap: list = field(default_factory=list)
    version: np.ndarray | None = None

    def column_best(self):
        """(gain, row, column) currently at the top of the priority heap."""
        self._prune()
        if not self.heap:
            return None
        g, j, i, _ = self.heap[0]
        return -g, i, j

    def _prune(self):
        while self.heap and self.heap[0][3] != self.version[self.heap[0][1]]:
            heapq.heappop(self.heap)


def build_cost_tables(paths: list[RegularizationPath], r: int, n: int) -> CostTables:
    """Fold per-column paths into the (r+1) x n cost table.

    Each path entry of cardinality k and error err updates rows k..r of
    its column wherever it improves the stored value, so every cell holds
    the best error among path solutions with at most that many nonzeros
    and columns are nonincreasing by construction.
    """
    if len(paths) != n:
        raise ValueError(f"expected {n} paths, got {len(paths)}")
    cost = np.full((r + 1, n), np.inf)
    present = np.zeros((r + 1, n), dtype=bool)
    sols = [[None] * n for _ in range(r + 1)]
    for j, path in enumerate(paths):
        entries = path.entries
        if not entries or entries[0].cardinality != 0:
            raise MissingZeroEntry(f"path for column {j} lacks the zero-solution entry")
        col = cost[:, j]
        for e in entries:
            k = e.cardinality
            err = e.error_sq
            if err < col[k]:
                present[k, j] = True
            for i in range(k, r + 1):
                if err < col[i]:
                    col[i] = err
                    sols[i][j] = e.solution
    return CostTables(cost=cost, sols=sols, present=present)


def delta_cost(tables: CostTables) -> CostTables:
    """Fill the r x n table of error decreases between adjacent levels."""
    c = tables.cost
    tables.delta = c[:-1, :] - c[1:, :]
    return tables


def column_gain(delta_col: np.ndarray, cursor: int) -> np.ndarray:
    """Mean error decrease per nonzero for advancing one column's cursor.

    Entry i (level i+1) is sum(delta[cursor:i+1]) / (i+1 - cursor) for
    levels above the cursor and 0 at or below it.
    """
    r = delta_col.shape[0]
    g = np.zeros(r)
    if cursor < r:
        seg = delta_col[cursor:]
        g[cursor:] = np.cumsum(seg) / np.arange(1, r - cursor + 1)
    return g


def init_gain(tables: CostTables) -> SelectionState:
    """Selection state with all cursors at zero and gains seeded."""
    if tables.delta is None:
        delta_cost(tables)
    r, n = tables.delta.shape
    gain = np.cumsum(tables.delta, axis=0) / np.arange(1, r + 1)[:, None]
    state = SelectionState(cursors=np.zeros(n, dtype=np.int64), gain=gain,
                           nnz_total=0, version=np.zeros(n, dtype=np.int64))
    best_rows = np.argmax(gain, axis=0)
    for j in range(n):
        g = float(gain[best_rows[j], j])
        if g > 0.0:
            state.heap.append((-g, j, int(best_rows[j]), 0))
    heapq.heapify(state.heap)
    return state


def _rebuild_column(state: SelectionState, tables: CostTables, j: int) -> None:
    g = column_gain(tables.delta[:, j], int(state.cursors[j]))
    state.gain[:, j] = g
    state.version[j] += 1
    i = int(np.argmax(g))
    if g[i] > 0.0:
        heapq.heappush(state.heap, (-float(g[i]), j, i, int(state.version[j])))


def _best_fitting(state: SelectionState, remaining: int):
    """Best positive gain among advances of at most ``remaining`` nonzeros."""
    r, n = state.gain.shape
    levels = np.arange(1, r + 1)[:, None]
    allowed = levels <= state.cursors[None, :] + remaining
    masked = np.where(allowed, state.gain, -np.inf)
    rows = np.argmax(masked, axis=0)
    vals = masked[rows, np.arange(n)]
    j = int(np.argmax(vals))
    if vals[j] <= 0.0:
        return None
    return float(vals[j]), int(rows[j]), j


def select_step(state: SelectionState, tables: CostTables, q: int,
                strict: bool = False):
    """Perform one greedy pick; returns (level, column) or None when done.

    Picks the global argmax of the gain table (ties: smaller column, then
    smaller row).  In strict mode a pick that would push the total above
    q is passed over in favor of the best advance that still fits; with
    no fitting positive advance the selection stops, so the budget is
    never exceeded.  In default mode the final pick may overshoot q by at
    most r - 1.
    """
    if state.nnz_total >= q:
        return None
    remaining = q - state.nnz_total
    if strict and remaining < state.gain.shape[0]:
        found = _best_fitting(state, remaining)
        if found is None:
            return None
        _, i, j = found
    else:
        found = state.column_best()
        if found is None:
            return None
        g, i, j = found
        if g <= 0.0:
            return None
    level = i + 1
    state.nnz_total += level - int(state.cursors[j])
    state.cursors[j] = level
    _rebuild_column(state, tables, j)
    return level, j


def select(state: SelectionState, tables: CostTables, q: int,
           strict: bool = False) -> np.ndarray:
    """Spend the nonzero budget q greedily; returns the final cursors."""
    if q < 0:
        raise ValueError("budget must be nonnegative")
    while select_step(state, tables, q, strict=strict) is not None:
        pass
    return state.cursors


def assemble(tables: CostTables, cursors: np.ndarray) -> np.ndarray:
    """Stack the selected per-column solutions into the r x n matrix."""
    r, n = tables.levels, tables.columns
    H = np.zeros((r, n), order="F")
    for j in range(n):
        H[:, j] = tables.sols[int(cursors[j])][j]
    return H

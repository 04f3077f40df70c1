"""Sparse multiple right-hand-sides nonnegative least squares.

Per column, a homotopy walk over the L1 penalty produces the whole
regularization path of the NNLS subproblem; a greedy selection then
spends a global nonzero budget across columns to assemble the solution
matrix.
"""

from . import densela, errors
from .homotopy import (PathEntry, RegularizationPath, lambda_max,
                       next_breakpoint, path_coefficients,
                       regularization_path, unbias)
from .mnnls import MODES, SolveConfig, UnmixReport, metrics, solve
from .nnls import NnlsSolution, nnls_active_set, nnls_gram
from .selector import (CostTables, SelectionState, assemble,
                       build_cost_tables, delta_cost, init_gain, select,
                       select_step)

__version__ = "0.1.0"

__all__ = [
    "MODES",
    "CostTables",
    "NnlsSolution",
    "PathEntry",
    "RegularizationPath",
    "SelectionState",
    "SolveConfig",
    "UnmixReport",
    "assemble",
    "build_cost_tables",
    "delta_cost",
    "densela",
    "errors",
    "init_gain",
    "lambda_max",
    "metrics",
    "next_breakpoint",
    "nnls_active_set",
    "nnls_gram",
    "path_coefficients",
    "regularization_path",
    "select",
    "select_step",
    "solve",
    "unbias",
]

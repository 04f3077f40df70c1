"""Command-line front end: CSV matrices in, CSV/JSON/PGM out.

Matrix files are headerless comma-separated reals, one matrix row per
line.  Input data must be nonnegative; negative entries are rejected
rather than clamped so corrupt inputs stay visible.  Exit codes: 0 on
success, 1 on usage errors, 2 on data errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .errors import (NegativeEntry, NonFiniteEntry, ParseError, RaggedRows,
                     ShamansError, ShapeMismatch)
from .mnnls import SolveConfig, UnmixReport, solve


class UsageError(Exception):
    """Bad flags or flag combinations; mapped to exit code 1."""


def read_csv_matrix(path) -> np.ndarray:
    """Load a headerless CSV of nonnegative reals as a column-major matrix."""
    rows = []
    width = None
    with open(path, "rt", encoding="ascii") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            vals = []
            for col_no, tok in enumerate(line.split(","), start=1):
                try:
                    v = float(tok)
                except ValueError:
                    raise ParseError(f"{path}:{line_no}:{col_no}: "
                                     f"cannot parse {tok.strip()!r} as a real",
                                     line=line_no, column=col_no) from None
                if not math.isfinite(v):
                    raise NonFiniteEntry(f"{path}:{line_no}:{col_no}: "
                                         "entry is not finite",
                                         line=line_no, column=col_no)
                if v < 0.0:
                    raise NegativeEntry(f"{path}:{line_no}:{col_no}: "
                                        "negative entry in nonnegative data",
                                        line=line_no, column=col_no)
                vals.append(v)
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise RaggedRows(f"{path}:{line_no}: row has {len(vals)} "
                                 f"entries, expected {width}", line=line_no)
            rows.append(vals)
    if not rows:
        raise ParseError(f"{path}: no matrix rows found", line=1, column=1)
    return np.asfortranarray(rows, dtype=np.float64)


def write_csv_matrix(H: np.ndarray, path) -> None:
    """Write a matrix in the same CSV format, 17 significant digits."""
    H = np.asarray(H)
    with open(path, "wt", encoding="ascii") as fh:
        for i in range(H.shape[0]):
            fh.write(",".join(f"{v:.17g}" for v in H[i, :]))
            fh.write("\n")


def write_report_json(report: UnmixReport, path) -> None:
    """Write the solve report as a small JSON object."""
    payload = {
        "rel_error": report.rel_error,
        "avg_sparsity": report.avg_sparsity,
        "nnz": report.nnz,
        "per_column_sparsity": list(report.per_column_sparsity),
        "elapsed_path_ms": report.elapsed_path_ms,
        "elapsed_select_ms": report.elapsed_select_ms,
        "mode": report.mode,
        "budget": report.budget,
    }
    with open(path, "wt", encoding="ascii") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def export_abundance_maps(H: np.ndarray, width: int, height: int, out_dir) -> None:
    """Write one grayscale PGM (P5) per row of H, reshaped row-major.

    Each image is scaled so the row maximum maps to 255, rounding half
    up; an all-zero row yields an all-black image.
    """
    H = np.asarray(H)
    r, n = H.shape
    if width * height != n:
        raise ShapeMismatch(f"width*height = {width * height} but H has {n} columns")
    os.makedirs(out_dir, exist_ok=True)
    for i in range(r):
        row = H[i, :]
        peak = float(row.max(initial=0.0))
        if peak > 0.0:
            pixels = np.floor(row / peak * 255.0 + 0.5).astype(np.uint8)
        else:
            pixels = np.zeros(n, dtype=np.uint8)
        img = pixels.reshape(height, width)
        with open(os.path.join(out_dir, f"abundance_{i:03d}.pgm"), "wb") as fh:
            fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
            fh.write(img.tobytes())


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="shamans",
                description="Sparse multiple right-hand-sides nonnegative "
                            "least squares.")
    p.add_argument("--dict", dest="dict_path", required=True,
                   help="CSV file with the m x r dictionary W")
    p.add_argument("--data", dest="data_path", required=True,
                   help="CSV file with the m x n data matrix M")
    p.add_argument("--out", dest="out_path", required=True,
                   help="output CSV file for the r x n solution H")
    p.add_argument("--mode", required=True,
                   choices=["shamans", "ksparse", "unconstrained"],
                   help="sparsity regime")
    p.add_argument("--budget", type=int, default=None,
                   help="total nonzero budget q (shamans mode)")
    p.add_argument("--k", type=int, default=None,
                   help="per-column sparsity k (ksparse mode)")
    p.add_argument("--tol", type=float, default=1e-10,
                   help="solver tolerance (default 1e-10)")
    p.add_argument("--zero-thresh", type=float, default=1e-3,
                   help="reporting threshold for nonzero counts (default 1e-3)")
    p.add_argument("--strict-budget", action="store_true",
                   help="never exceed the budget q, even on the last step")
    p.add_argument("--report", dest="report_path", default=None,
                   help="optional JSON report output path")
    p.add_argument("--maps-dir", default=None,
                   help="optional directory for per-row PGM abundance maps")
    p.add_argument("--map-width", type=int, default=None,
                   help="image width for --maps-dir (width*height must equal n)")
    p.add_argument("--map-height", type=int, default=None,
                   help="image height for --maps-dir")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads for the per-column paths (default 1)")
    return p


def _validate(args) -> None:
    if args.mode == "shamans":
        if args.budget is None:
            raise UsageError("--mode shamans requires --budget")
        if args.k is not None:
            raise UsageError("--k does not apply to shamans mode")
    elif args.mode == "ksparse":
        if args.k is None:
            raise UsageError("--mode ksparse requires --k")
        if args.budget is not None:
            raise UsageError("--budget does not apply to ksparse mode")
    else:
        if args.budget is not None or args.k is not None:
            raise UsageError("--budget/--k do not apply to unconstrained mode")
    if args.maps_dir is not None and (args.map_width is None or args.map_height is None):
        raise UsageError("--maps-dir requires --map-width and --map-height")
    if args.threads < 1:
        raise UsageError("--threads must be at least 1")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _validate(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        W = read_csv_matrix(args.dict_path)
        M = read_csv_matrix(args.data_path)
        cfg = SolveConfig(mode=args.mode, q=args.budget, k=args.k,
                          tol=args.tol, zero_threshold=args.zero_thresh,
                          strict_budget=args.strict_budget,
                          parallel=args.threads > 1, threads=args.threads)
        H, report = solve(M, W, cfg)
        write_csv_matrix(H, args.out_path)
        if args.report_path is not None:
            write_report_json(report, args.report_path)
        if args.maps_dir is not None:
            export_abundance_maps(H, args.map_width, args.map_height,
                                  args.maps_dir)
    except (ShamansError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def console_main() -> None:
    raise SystemExit(main())

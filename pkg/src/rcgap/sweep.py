"""Convergence sweeps over (N, seed) and the report they produce."""
from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .analysis import shape_report
from .environment import lln_diagnostics, make_homogeneous, make_iid, parse_distribution
from .shooting import DEFAULT_TOL, EigenPair, ShootingError, solve_eigenvalue

__all__ = [
    "SweepRow",
    "ConvergenceReport",
    "build_environment",
    "run_row",
    "run_sweep",
    "format_float",
    "loglog_slope",
]


def format_float(value) -> str:
    """Shortest round-tripping decimal; 'nan' / 'inf' / '-inf' for the rest."""
    if value is None:
        return "nan"
    return repr(float(value))


def build_environment(dist: str, n: int, seed: int):
    law = parse_distribution(dist)
    if law is None:
        return make_homogeneous(n)
    return make_iid(n, law, seed)


@dataclass
class SweepRow:
    n: int
    seed: int
    status: str = "ok"
    gap: float = math.nan
    gap_ratio: float = math.nan
    lambda_ratios: list[float] = field(default_factory=list)
    shape_by_mode: list[float] = field(default_factory=list)
    sup_shape: float = math.nan
    sup_deriv: float = math.nan
    delta0: float = math.nan
    delta1: float = math.nan
    wall_time: float = 0.0
    # kept in memory only, for the overlay plot
    g1: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def run_row(
    dist: str, n: int, seed: int, modes: int = 1, tol: float = DEFAULT_TOL, keep_g1: bool = False
) -> SweepRow:
    start = time.perf_counter()
    row = SweepRow(n=n, seed=seed)
    try:
        env = build_environment(dist, n, seed)
        k0 = min(modes, n - 1)
        pairs = [EigenPair(0, 0.0, np.ones(n), 0.0)]
        pairs += [solve_eigenvalue(env, j, tol) for j in range(1, k0 + 1)]
        report = shape_report(env, pairs)
        gap = pairs[1].lam
        row.gap = gap
        row.gap_ratio = n * n * gap / math.pi**2
        row.lambda_ratios = [m.lambda_ratio for m in report.modes[1:]]
        row.shape_by_mode = [m.sup_shape for m in report.modes[1:]]
        row.sup_shape = report.sup_shape
        row.sup_deriv = report.sup_deriv
        diag = lln_diagnostics(env)
        row.delta0, row.delta1 = diag.delta0, diag.delta1
        if keep_g1:
            row.g1 = pairs[1].values
    except (ShootingError, ValueError, FloatingPointError) as exc:
        row.status = f"failed: {exc}"
    row.wall_time = time.perf_counter() - start
    return row


def _run_row_args(args):
    return run_row(*args)


def loglog_slope(ns: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of log(values) against log(ns)."""
    x = np.log(np.asarray(ns, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


@dataclass
class ConvergenceReport:
    dist: str
    modes: int
    rows: list[SweepRow]

    def ok_rows(self) -> list[SweepRow]:
        return [r for r in self.rows if r.ok]

    def ns(self) -> list[int]:
        return sorted({r.n for r in self.ok_rows()})

    def rows_at(self, n: int) -> list[SweepRow]:
        return [r for r in self.ok_rows() if r.n == n]

    def median_gap(self) -> dict[int, float]:
        return {n: float(np.median([r.gap for r in self.rows_at(n)])) for n in self.ns()}

    def median_abs_ratio_error(self) -> dict[int, float]:
        return {
            n: float(np.median([abs(r.gap_ratio - 1.0) for r in self.rows_at(n)]))
            for n in self.ns()
        }

    def gap_slope(self) -> float:
        med = self.median_gap()
        return loglog_slope(list(med), list(med.values()))

    def header(self) -> list[str]:
        cols = ["n", "seed", "status", "gap", "gap_ratio"]
        cols += [f"lambda_ratio_{j}" for j in range(1, self.modes + 1)]
        cols += ["sup_shape", "sup_deriv"]
        cols += [f"sup_shape_{j}" for j in range(1, self.modes + 1)]
        cols += ["delta0", "delta1", "wall_time"]
        return cols

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header())
        for r in self.rows:
            ratios = (r.lambda_ratios + [math.nan] * self.modes)[: self.modes]
            shapes = (r.shape_by_mode + [math.nan] * self.modes)[: self.modes]
            writer.writerow(
                [r.n, r.seed, r.status, format_float(r.gap), format_float(r.gap_ratio)]
                + [format_float(v) for v in ratios]
                + [format_float(r.sup_shape), format_float(r.sup_deriv)]
                + [format_float(v) for v in shapes]
                + [format_float(r.delta0), format_float(r.delta1), format_float(r.wall_time)]
            )
        return buf.getvalue()

    def summary(self) -> dict:
        med = self.median_abs_ratio_error()
        out = {
            "dist": self.dist,
            "rows": len(self.rows),
            "failed": len(self.rows) - len(self.ok_rows()),
            "median_abs_gap_ratio_error": {str(k): v for k, v in med.items()},
        }
        if len(self.ns()) >= 2:
            out["loglog_slope_median_gap"] = self.gap_slope()
        return out


def run_sweep(
    dist: str,
    n_list: Sequence[int],
    seeds: Sequence[int],
    modes: int = 1,
    tol: float = DEFAULT_TOL,
    jobs: int = 1,
    keep_g1: bool = False,
) -> ConvergenceReport:
    parse_distribution(dist)  # fail fast on a bad law
    tasks = [(dist, n, s, modes, tol, keep_g1) for n in sorted(n_list) for s in sorted(seeds)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_row_args, tasks))
    else:
        rows = [_run_row_args(t) for t in tasks]
    rows.sort(key=lambda r: (r.n, r.seed))
    return ConvergenceReport(dist=dist, modes=modes, rows=rows)

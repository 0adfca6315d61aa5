#!/usr/bin/env python3
"""Scaling exponent of the median spectral gap under Pareto resistances.

With tail index a < 1 the mean resistance is infinite and the gap is set by
the largest single resistance, so it should shrink faster than N^-2.  The
slope of log(median gap) against log N is printed together with a seed
bootstrap, which shows how many seeds a stable estimate needs.
"""
import argparse

import numpy as np

from rcgap.sweep import loglog_slope, run_sweep


def bootstrap_slopes(report, draws: int, rng: np.random.Generator) -> np.ndarray:
    ns = report.ns()
    gaps = {n: np.array([r.gap for r in report.rows_at(n)]) for n in ns}
    out = np.empty(draws)
    for i in range(draws):
        med = [np.median(rng.choice(gaps[n], size=gaps[n].size)) for n in ns]
        out[i] = loglog_slope(ns, med)
    return out


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--seeds", type=int, default=25)
    ap.add_argument("--log2-min", type=int, default=7)
    ap.add_argument("--log2-max", type=int, default=14)
    ap.add_argument("--bootstrap", type=int, default=2000)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--csv", help="also write the raw sweep table here")
    args = ap.parse_args()

    ns = [2**k for k in range(args.log2_min, args.log2_max + 1)]
    report = run_sweep(f"pareto:{args.alpha}", ns, range(args.seeds), jobs=args.jobs)
    if args.csv:
        with open(args.csv, "w", newline="\n") as fh:
            fh.write(report.to_csv())

    for n, gap in report.median_gap().items():
        print(f"N={n:>6}  median gap {gap:.4e}  N^2 * gap {n * n * gap:.4e}")
    slope = report.gap_slope()
    boots = bootstrap_slopes(report, args.bootstrap, np.random.default_rng(12345))
    lo, hi = np.quantile(boots, [0.025, 0.975])
    print(f"slope {slope:.3f}  bootstrap s.e. {boots.std():.3f}  95% interval [{lo:.3f}, {hi:.3f}]")
    print(f"failed rows: {len(report.rows) - len(report.ok_rows())}")


if __name__ == "__main__":
    main()

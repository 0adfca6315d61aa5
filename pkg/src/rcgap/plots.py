"""Self-contained SVG figures (matplotlib, Agg backend, no embedded dates)."""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "rcgap"
    matplotlib.rcParams["svg.fonttype"] = "path"
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata={"Date": None})
    return path


def line_chart(
    path,
    series: dict[str, tuple[Sequence[float], Sequence[float]]],
    xlabel: str,
    ylabel: str,
    title: str = "",
    logx: bool = False,
    logy: bool = False,
) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, (x, y) in series.items():
        ax.plot(x, y, marker="o", ms=3, lw=1, label=name)
    if logx:
        ax.set_xscale("log", base=2)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(series) > 1:
        ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    out = _save(fig, Path(path))
    plt.close(fig)
    return out


def convergence_plots(report, outdir) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    ns = report.ns()
    if not ns:
        return []
    seeds = sorted({r.seed for r in report.ok_rows()})
    by_seed = {
        s: [r for r in report.ok_rows() if r.seed == s] for s in seeds
    }
    paths = [
        line_chart(
            outdir / "gap_ratio.svg",
            {f"seed {s}": ([r.n for r in rows], [r.gap_ratio for r in rows]) for s, rows in by_seed.items()},
            "N",
            "N^2 gap / pi^2",
            f"spectral gap ratio ({report.dist})",
            logx=True,
        ),
        line_chart(
            outdir / "sup_shape.svg",
            {f"seed {s}": ([r.n for r in rows], [r.sup_shape for r in rows]) for s, rows in by_seed.items()},
            "N",
            "sup |g1 - h|",
            f"eigenfunction shape error ({report.dist})",
            logx=True,
            logy=True,
        ),
    ]
    top = [r for r in report.rows_at(ns[-1]) if r.g1 is not None]
    if top:
        g = top[0].g1
        n = g.size
        x = np.arange(1, n + 1)
        h = np.cos(np.pi * (x - 0.5) / n)
        paths.append(
            line_chart(
                outdir / "eigenfunction.svg",
                {"g1": (x / n, g), "h": (x / n, h)},
                "x / N",
                "value",
                f"g1 vs h at N={n}, seed {top[0].seed}",
            )
        )
    return paths


def trajectory_plot(report, path) -> Path:
    n = report.n
    x = np.arange(1, n + 2) / n
    mask = ~np.isnan(report.profile)
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(x, np.clip(report.bvals, -20, 20), lw=1, label="B(x) (clipped to ±20)")
    seg_vals = np.where(report.segment == 2, report.avals, np.nan)
    ax.plot(x, seg_vals, lw=1, label="A(x) on segment 2")
    ax.plot(x[mask], np.clip(report.profile[mask], -20, 20), ".", ms=1, label="tangent profile")
    ax.set_xlabel("x / N")
    ax.set_title(f"rescaled ratio trajectory, alpha={report.alpha:.4g}, N={n}")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    out = _save(fig, Path(path))
    plt.close(fig)
    return out

"""Command-line front end: ``rcgap gen|solve|sweep|trajectory``.

Exit codes: 0 ok, 2 usage, 3 I/O, 4 solver.  Option values come from the
defaults, then an optional ``--config`` JSON object (keys are option names
with dashes replaced by underscores), then explicit flags.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .analysis import b_trajectory, count_extrema, shape_report
from .environment import (
    Environment,
    load_environment,
    make_homogeneous,
    make_iid,
    parse_distribution,
)
from .oracle import OracleError, oracle_spectrum
from .shooting import DEFAULT_TOL, EigenPair, ShootingError, solve_eigenvalue
from .sweep import format_float, run_sweep

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_SOLVER = 0, 2, 3, 4

DEFAULTS = {
    "gen": {"n": None, "dist": "homog", "seed": 0, "out": None},
    "solve": {
        "env": None,
        "modes": None,
        "tol": DEFAULT_TOL,
        "oracle": False,
        "format": "csv",
        "out": None,
    },
    "sweep": {
        "dist": "uniform:0.5,1.5",
        "n_list": "128,256,512,1024,2048,4096,8192",
        "seeds": 5,
        "modes": 5,
        "tol": DEFAULT_TOL,
        "plot": None,
        "jobs": 1,
        "out": None,
    },
    "trajectory": {"env": None, "alpha": math.pi**2, "eps": 0.1, "plot": None, "out": None},
}


class UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rcgap", description="Spectrum of the random conductance walk on a segment."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file of option defaults")
        p.add_argument("--out", default=None, help="output file (default: stdout)")

    gen = sub.add_parser("gen", help="generate an environment file")
    gen.add_argument("--n", type=int, default=None)
    gen.add_argument("--dist", default=None, help="homog | uniform:a,b | lognormal:m,s | pareto:alpha")
    gen.add_argument("--seed", type=int, default=None)
    common(gen)

    solve = sub.add_parser("solve", help="spectrum report for an environment file")
    solve.add_argument("--env", default=None)
    solve.add_argument("--modes", type=int, default=None, help="report modes 0..K-1")
    solve.add_argument("--tol", type=float, default=None)
    solve.add_argument("--oracle", action="store_true", default=None)
    solve.add_argument("--format", choices=["json", "csv"], default=None)
    common(solve)

    sweep = sub.add_parser("sweep", help="convergence study over N and seeds")
    sweep.add_argument("--dist", default=None)
    sweep.add_argument("--n-list", dest="n_list", default=None)
    sweep.add_argument("--seeds", type=int, default=None, help="seeds 0..S-1")
    sweep.add_argument("--modes", type=int, default=None, help="K0")
    sweep.add_argument("--tol", type=float, default=None)
    sweep.add_argument("--plot", default=None, help="directory for SVG plots")
    sweep.add_argument("--jobs", type=int, default=None)
    common(sweep)

    traj = sub.add_parser("trajectory", help="rescaled ratio trajectory B(x)")
    traj.add_argument("--env", default=None)
    traj.add_argument("--alpha", type=float, default=None)
    traj.add_argument("--eps", type=float, default=None)
    traj.add_argument("--plot", default=None, help="directory for the SVG plot")
    common(traj)
    return parser


def _options(args: argparse.Namespace) -> dict:
    opts = dict(DEFAULTS[args.command])
    if args.config:
        try:
            config = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise OSError(f"cannot read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {args.config} is not valid JSON: {exc}") from exc
        if not isinstance(config, dict):
            raise UsageError("config must be a JSON object")
        unknown = set(config) - set(opts)
        if unknown:
            raise UsageError(f"unknown config keys for {args.command}: {sorted(unknown)}")
        opts.update(config)
    for key in opts:
        value = getattr(args, key, None)
        if value is not None:
            opts[key] = value
    return opts


def _emit(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, newline="\n")


def _load(path) -> Environment:
    if path is None:
        raise UsageError("--env is required")
    try:
        return load_environment(path)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise OSError(f"cannot read environment {path}: {exc}") from exc


# -- verbs ------------------------------------------------------------------


def cmd_gen(opts: dict) -> int:
    n = opts["n"]
    if n is None:
        raise UsageError("--n is required")
    if n < 1:
        raise UsageError("n must be ≥ 1")
    try:
        law = parse_distribution(opts["dist"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    env = make_homogeneous(n) if law is None else make_iid(n, law, opts["seed"])
    _emit(env.to_json(), opts["out"])
    return EXIT_OK


def _solve_rows(env: Environment, modes: int, tol: float, with_oracle: bool):
    n = env.n
    pairs = [EigenPair(0, 0.0, np.ones(n), 0.0)]
    pairs += [solve_eigenvalue(env, j, tol) for j in range(1, modes)]
    shapes = shape_report(env, pairs)
    oracle = oracle_spectrum(env) if with_oracle else None
    rows = []
    for pair, shape in zip(pairs, shapes.modes):
        extrema = count_extrema(pair.shape).count if n >= 2 else 0
        dev = abs(pair.lam - oracle[pair.mode][0]) if oracle else math.nan
        rows.append(
            {
                "mode": pair.mode,
                "lambda": pair.lam,
                "lambda_ratio": shape.lambda_ratio,
                "extrema_count": extrema,
                "sup_shape": shape.sup_shape,
                "sup_deriv": shape.sup_deriv,
                "residual": pair.residual,
                "oracle_dev": dev,
                "values": pair.values,
                "shape": pair.shape,
                "log2_peak": pair.log2_peak,
            }
        )
    return rows


SOLVE_COLUMNS = [
    "mode",
    "lambda",
    "lambda_ratio",
    "extrema_count",
    "sup_shape",
    "sup_deriv",
    "residual",
    "oracle_dev",
]


def _json_float(v):
    v = float(v)
    return v if math.isfinite(v) else None


def cmd_solve(opts: dict) -> int:
    env = _load(opts["env"])
    modes = env.n if opts["modes"] is None else opts["modes"]
    if not 1 <= modes <= env.n:
        raise UsageError(f"--modes must lie in [1, {env.n}]")
    rows = _solve_rows(env, modes, opts["tol"], opts["oracle"])
    if opts["format"] == "json":
        devs = [r["oracle_dev"] for r in rows]
        payload = {
            "n": env.n,
            "label": env.label,
            "seed": env.seed,
            "max_oracle_dev": _json_float(max(devs)) if opts["oracle"] else None,
            "modes": [
                {
                    **{k: (_json_float(r[k]) if k not in ("mode", "extrema_count") else r[k]) for k in SOLVE_COLUMNS},
                    # entries beyond the double range become null; shape stays finite
                    "values": [_json_float(v) for v in r["values"]],
                    "shape": [float(v) for v in r["shape"]],
                    "log2_peak": float(r["log2_peak"]),
                }
                for r in rows
            ],
        }
        _emit(json.dumps(payload, indent=1) + "\n", opts["out"])
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(SOLVE_COLUMNS)
        for r in rows:
            writer.writerow(
                [r["mode"]]
                + [format_float(r[k]) for k in ("lambda", "lambda_ratio")]
                + [r["extrema_count"]]
                + [format_float(r[k]) for k in ("sup_shape", "sup_deriv", "residual", "oracle_dev")]
            )
        _emit(buf.getvalue(), opts["out"])
    return EXIT_OK


def _parse_n_list(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    try:
        ns = [int(tok) for tok in str(text).split(",") if tok.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --n-list {text!r}") from exc
    if not ns or min(ns) < 2:
        raise UsageError("--n-list needs sizes ≥ 2")
    return ns


def cmd_sweep(opts: dict) -> int:
    try:
        parse_distribution(opts["dist"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    ns = _parse_n_list(opts["n_list"])
    if opts["seeds"] < 1 or opts["modes"] < 1 or opts["jobs"] < 1:
        raise UsageError("--seeds, --modes and --jobs must be ≥ 1")
    report = run_sweep(
        opts["dist"],
        ns,
        range(opts["seeds"]),
        modes=opts["modes"],
        tol=opts["tol"],
        jobs=opts["jobs"],
        keep_g1=opts["plot"] is not None,
    )
    _emit(report.to_csv(), opts["out"])
    for row in report.rows:
        if not row.ok:
            print(f"warning: N={row.n} seed={row.seed} {row.status}", file=sys.stderr)
    print(json.dumps(report.summary()), file=sys.stderr)
    if opts["plot"]:
        def draw():
            from .plots import convergence_plots

            convergence_plots(report, opts["plot"])

        _try_plot(draw)
    return EXIT_OK if report.ok_rows() else EXIT_SOLVER


def cmd_trajectory(opts: dict) -> int:
    env = _load(opts["env"])
    if env.n < 2:
        raise UsageError("trajectory needs n ≥ 2")
    if not opts["alpha"] > 0:
        raise UsageError("--alpha must be > 0")
    report = b_trajectory(env, opts["alpha"], opts["eps"])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x", "B", "A", "segment", "profile_value", "deviation"])
    for i in range(env.n + 1):
        big_b = math.inf if report.b_inf[i] else report.bvals[i]
        big_a = math.inf if report.a_inf[i] else report.avals[i]
        writer.writerow(
            [
                i + 1,
                format_float(big_b),
                format_float(big_a),
                int(report.segment[i]),
                format_float(report.profile[i]),
                format_float(report.deviation[i]),
            ]
        )
    _emit(buf.getvalue(), opts["out"])
    summary = {
        "alpha": report.alpha,
        "tau1": report.tau1,
        "tau2": report.tau2,
        "tau": report.tau,
        "tau_prime": report.tau_prime,
        "sup_dev_seg1": report.sup_dev_seg1,
        "sup_dev_seg2": report.sup_dev_seg2,
        "sup_dev_seg3": report.sup_dev_seg3,
        "flags": report.flags,
    }
    print(json.dumps(summary, default=str), file=sys.stderr)
    if opts["plot"]:
        def draw():
            from .plots import trajectory_plot

            Path(opts["plot"]).mkdir(parents=True, exist_ok=True)
            trajectory_plot(report, Path(opts["plot"]) / "trajectory.svg")

        _try_plot(draw)
    return EXIT_OK


def _try_plot(draw) -> None:
    # plotting never changes the exit code
    try:
        draw()
    except Exception as exc:  # noqa: BLE001
        print(f"warning: plotting failed: {exc}", file=sys.stderr)


COMMANDS = {
    "gen": cmd_gen,
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "trajectory": cmd_trajectory,
}


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        opts = _options(args)
        return COMMANDS[args.command](opts)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ShootingError, OracleError) as exc:
        payload = {"error": str(exc), **getattr(exc, "payload", {})}
        print(json.dumps(payload, default=str), file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())

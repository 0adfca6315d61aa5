"""Independent eigensolver for the tridiagonal matrix of -Delta^(c).

Eigenvalues come from Sturm-sequence counting and bisection (all requested
indices bisected together, vectorised over lambda); eigenvectors from
shifted inverse iteration.  Nothing here shares code with the angle
shooting solver, so the two act as each other's check.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from .environment import Environment
from .operator import TridiagonalOperator

__all__ = [
    "SturmCount",
    "OracleError",
    "sturm_count",
    "sturm_counts",
    "oracle_eigenvalues",
    "inverse_iteration",
    "oracle_spectrum",
]

# zero pivots are replaced by -PIVMIN_SCALE * tiny * max(1, ||T||); LAPACK's choice
PIVMIN_SCALE = 1.0
MAX_INVERSE_ITERATIONS = 50


class OracleError(RuntimeError):
    pass


@dataclass(frozen=True)
class SturmCount:
    lam: float
    negcount: int


def _pivmin(op: TridiagonalOperator) -> float:
    scale = max(1.0, float(np.max(op.offdiag**2, initial=0.0)))
    return PIVMIN_SCALE * np.finfo(float).tiny * scale


def sturm_counts(op: TridiagonalOperator, lams) -> np.ndarray:
    """Number of eigenvalues strictly below each entry of ``lams``."""
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    pivmin = _pivmin(op)
    e2 = op.offdiag**2
    q = op.diag[0] - lams
    q = np.where(np.abs(q) < pivmin, -pivmin, q)
    count = (q < 0).astype(np.int64)
    for i in range(1, op.n):
        q = (op.diag[i] - lams) - e2[i - 1] / q
        q = np.where(np.abs(q) < pivmin, -pivmin, q)
        count += q < 0
    return count


def sturm_count(op: TridiagonalOperator, lam: float) -> SturmCount:
    return SturmCount(float(lam), int(sturm_counts(op, [lam])[0]))


def oracle_eigenvalues(
    op: TridiagonalOperator,
    tol: float = 1e-14,
    indices: Optional[Sequence[int]] = None,
) -> np.ndarray:
    """Bisect each requested eigenvalue index until the bracket is tol * lambda_max wide."""
    if not tol > 0:
        raise ValueError("tol must be > 0")
    n = op.n
    idx = np.arange(n) if indices is None else np.asarray(indices, dtype=np.int64)
    top = op.gershgorin_bound()
    if top == 0.0:
        # only the 1x1 zero matrix has no edges
        return np.zeros(idx.size)
    width = tol * top
    lo = np.full(idx.size, -width)
    hi = np.full(idx.size, top + width)
    for _ in range(2000):
        active = hi - lo > width
        if not active.any():
            break
        mid = 0.5 * (lo + hi)
        stuck = (mid <= lo) | (mid >= hi)
        active &= ~stuck
        if not active.any():
            break
        counts = sturm_counts(op, mid[active])
        below = counts <= idx[active]
        a = np.flatnonzero(active)
        lo[a[below]] = mid[active][below]
        hi[a[~below]] = mid[active][~below]
    return 0.5 * (lo + hi)


def _start_vector(n: int, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    if rng is not None:
        return rng.standard_normal(n)
    ramp = 1.0 + np.arange(n) / max(n, 1)
    return np.where(np.arange(n) % 2 == 0, ramp, -ramp)


def inverse_iteration(
    op: TridiagonalOperator,
    lam: float,
    against: Sequence[np.ndarray] = (),
    rtol: float = 1e-13,
) -> np.ndarray:
    """Eigenvector for the eigenvalue closest to ``lam``, unit 2-norm.

    ``against`` holds unit vectors of nearby eigenvalues to project out.
    """
    n = op.n
    if n == 1:
        return np.ones(1)
    bands = np.zeros((3, n))
    bands[0, 1:] = op.offdiag
    bands[2, :-1] = op.offdiag
    scale = max(op.gershgorin_bound(), 1.0)
    shift = lam
    rng = None
    v = _start_vector(n)
    v /= np.linalg.norm(v)
    stagnant = 0
    for _ in range(MAX_INVERSE_ITERATIONS):
        bands[1] = op.diag - shift
        try:
            y = solve_banded((1, 1), bands, v, check_finite=False)
        except LinAlgError:
            shift = lam + 4 * np.finfo(float).eps * scale
            continue
        for u in against:
            y -= (u @ y) * u
        norm = np.linalg.norm(y)
        if not np.isfinite(norm) or norm == 0.0:
            rng = rng or np.random.default_rng(n)
            v = _start_vector(n, rng)
            v /= np.linalg.norm(v)
            continue
        y /= norm
        if y @ v < 0:
            y = -y
        change = np.linalg.norm(y - v)
        v = y
        if change < rtol * np.sqrt(n):
            return v
        stagnant = stagnant + 1 if change > 1.0 else 0
        if stagnant >= 3:
            rng = rng or np.random.default_rng(n)
            v = _start_vector(n, rng)
            v /= np.linalg.norm(v)
            stagnant = 0
    raise OracleError(
        f"inverse iteration at lambda={lam!r} did not converge in "
        f"{MAX_INVERSE_ITERATIONS} iterations"
    )


def oracle_spectrum(env: Environment, tol: float = 1e-14) -> list[tuple[float, np.ndarray]]:
    """All N (lambda, eigenvector) pairs, eigenvectors scaled to first component 1."""
    op = TridiagonalOperator.from_env(env)
    lams = oracle_eigenvalues(op, tol)
    cluster = 1e-3 * max(op.gershgorin_bound(), 1.0)
    units: list[np.ndarray] = []
    out = []
    for i, lam in enumerate(lams):
        near = [units[k] for k in range(i) if lam - lams[k] < cluster]
        u = inverse_iteration(op, float(lam), near)
        units.append(u)
        out.append((float(lam), u / u[0]))
    return out

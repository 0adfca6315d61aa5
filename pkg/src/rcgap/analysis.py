"""Structural and asymptotic diagnostics of computed eigenpairs.

* ``count_extrema``: plateau-aware local extrema in the interior [[2, N-1]];
  an eigenfunction of mode j >= 1 should have exactly j - 1 of them.
* ``b_trajectory``: the rescaled ratio B(x) = N b(alpha/N^2, x), its
  reciprocal A = 1/B, the crossing indices tau1, tau2, tau, tau' and the
  sup-deviations from the three tangent profiles of the limit ODE
  y' = y^2 + alpha.
* ``shape_report``: sup-distance of g_j to h_j(x) = cos(j pi (x - 1/2) / N)
  and of the weighted derivative N (c grad g_j) to N grad h_j.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .environment import Environment, resistance_partial_sums
from .operator import weighted_gradient
from .shooting import EigenPair

__all__ = [
    "Extremum",
    "ExtremaReport",
    "count_extrema",
    "TrajectoryReport",
    "b_trajectory",
    "ModeShape",
    "ShapeReport",
    "shape_report",
    "reference_profile",
    "reference_ratio_path",
    "min_decrement",
    "gradient_identity_defect",
]


# -- extrema ----------------------------------------------------------------


@dataclass(frozen=True)
class Extremum:
    start: int  # 1-based, inclusive
    stop: int
    kind: str  # "max" | "min"


@dataclass(frozen=True)
class ExtremaReport:
    extrema: list[Extremum]
    count: int
    monotone_degree: int


def count_extrema(f, plateau_tol: float = 1e-9) -> ExtremaReport:
    """Local extrema on maximal plateaus inside [[2, N-1]].

    Two neighbouring values are equal iff they differ by at most
    ``plateau_tol`` times the larger of their magnitudes.  Plateaus touching
    site 1 or N never count.

    The scale is local on purpose: a localised eigenvector can carry
    correctly signed oscillations at 1e-12 of its peak, and measuring them
    against max|f| would fuse them into spurious plateaus.
    """
    f = np.asarray(f, dtype=float)
    if f.size < 2:
        raise ValueError("need at least two values")
    if plateau_tol < 0:
        raise ValueError("plateau_tol must be ≥ 0")
    scale = np.maximum(np.abs(f[:-1]), np.abs(f[1:]))
    same = np.abs(np.diff(f)) <= plateau_tol * scale
    # maximal runs of equal values, as [start, stop] 0-based inclusive
    breaks = np.flatnonzero(~same)
    starts = np.concatenate([[0], breaks + 1])
    stops = np.concatenate([breaks, [f.size - 1]])
    extrema = []
    for s, e in zip(starts[1:-1], stops[1:-1]):
        left, mid, right = f[s - 1], f[s], f[e + 1]
        if left < mid and mid > right:
            extrema.append(Extremum(int(s) + 1, int(e) + 1, "max"))
        elif left > mid and mid < right:
            extrema.append(Extremum(int(s) + 1, int(e) + 1, "min"))
    return ExtremaReport(extrema, len(extrema), len(extrema) + 1)


def min_decrement(g) -> float:
    """min over x of g(x-1) - g(x); positive iff g is strictly decreasing."""
    return float(np.min(-np.diff(np.asarray(g, dtype=float))))


def gradient_identity_defect(env: Environment, pair: EigenPair) -> float:
    """max_x |(c grad g)(x+1) + lam * sum_{k<=x} g(k)|, relative to max|c grad g|.

    The weighted gradient of an eigenfunction is minus lam times its prefix
    sums, for every x in [[1, N]].  Evaluated on the peak-normalised shape,
    which leaves the relative defect unchanged.
    """
    g = pair.shape
    grad = weighted_gradient(env, g)[1:]
    prefix = np.cumsum(g)
    scale = max(float(np.max(np.abs(grad))), pair.lam * float(np.max(np.abs(prefix))))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(grad + pair.lam * prefix)) / scale)


# -- reference (homogeneous) profiles ---------------------------------------


def reference_profile(n: int, mode: int = 1) -> np.ndarray:
    x = np.arange(1, n + 1)
    return np.cos(mode * math.pi * (x - 0.5) / n)


def reference_ratio_path(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic twin of the ratio recursion at the homogeneous gap.

    Returns (Bbar(x) for x = 1..N+1, h rebuilt from h(1) by
    h(x) = [1 - Bbar(x)/N] h(x-1)).
    """
    lam_bar = 2.0 * (1.0 - math.cos(math.pi / n))
    bbar = np.zeros(n + 1)
    for x in range(1, n + 1):
        bbar[x] = bbar[x - 1] / (1.0 - bbar[x - 1] / n) + n * lam_bar
    h = np.empty(n)
    h[0] = math.cos(math.pi / (2 * n))
    for x in range(2, n + 1):
        h[x - 1] = (1.0 - bbar[x - 1] / n) * h[x - 2]
    return bbar, h


# -- trajectories -----------------------------------------------------------


@dataclass
class TrajectoryReport:
    alpha: float
    n: int
    bvals: np.ndarray = field(repr=False)  # B(x), x = 1..N+1; nan where INF_BAR
    b_inf: np.ndarray = field(repr=False)
    avals: np.ndarray = field(repr=False)  # A(x) = 1/B(x); nan where B = 0
    a_inf: np.ndarray = field(repr=False)
    tau1: Optional[int]
    tau2: Optional[int]
    tau: Optional[int]
    tau_prime: Optional[int]
    sup_dev_seg1: float
    sup_dev_seg2: float
    sup_dev_seg3: float
    segment: np.ndarray = field(repr=False)  # 0 = none, else 1/2/3 for each x
    profile: np.ndarray = field(repr=False)
    deviation: np.ndarray = field(repr=False)
    flags: list[str] = field(default_factory=list)

    @property
    def terminal_ratio(self) -> float:
        """b(lambda, N+1) = B(N+1)/N."""
        return math.inf if self.b_inf[-1] else float(self.bvals[-1] / self.n)


def _rescaled_path(env: Environment, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    n = env.n
    r = np.concatenate([[1.0], env.resistances])  # r(0,1) arbitrary; B(1) = 0
    big_b = np.zeros(n + 1)
    inf = np.zeros(n + 1, dtype=bool)
    step = alpha / n
    for x in range(1, n + 1):
        prev, rr = big_b[x - 1], r[x - 1]
        if inf[x - 1]:
            big_b[x] = -n / rr + step
            continue
        denom = n - rr * prev
        if denom == 0.0:
            inf[x] = True
            big_b[x] = np.nan
        else:
            big_b[x] = n * prev / denom + step
    return big_b, inf


def b_trajectory(env: Environment, alpha: float, eps: float = 0.1) -> TrajectoryReport:
    """Run B(x+1) = B(x) / (1 - r(x-1,x) B(x)/N) + alpha/N from B(1) = 0."""
    if not alpha > 0:
        raise ValueError("alpha must be > 0")
    if env.n < 2:
        raise ValueError("trajectory needs n ≥ 2")
    n = env.n
    sa = math.sqrt(alpha)
    big_b, b_inf = _rescaled_path(env, alpha)
    a_inf = ~b_inf & (big_b == 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        big_a = np.where(b_inf, 0.0, 1.0 / big_b)
    big_a[a_inf] = np.nan

    flags: list[str] = []
    xs = np.arange(1, n + 2)
    rsum = resistance_partial_sums(env)  # r(1, x) for x = 1..N
    scaled = sa * rsum / n

    hits = np.flatnonzero(scaled >= math.pi / 4)
    tau1 = int(hits[0]) + 1 if hits.size else None
    below = np.flatnonzero(scaled <= 3 * math.pi / 4)
    tau2 = int(below[-1]) + 1 if below.size else None
    finite_a = ~a_inf[:n]
    drop = np.flatnonzero(finite_a & (big_a[:n] <= -2.0 / sa))
    # tau = (first site with A <= -2/sqrt(alpha)) - 1; site = index + 1
    tau = int(drop[0]) if drop.size else None
    tau_prime = None
    if tau2 is not None:
        ok = np.flatnonzero(~b_inf[tau2 - 1 :] & (big_b[tau2 - 1 :] <= 2 * sa))
        if ok.size:
            tau_prime = int(ok[-1]) + tau2

    segment = np.zeros(n + 1, dtype=np.int8)
    profile = np.full(n + 1, np.nan)
    deviation = np.full(n + 1, np.nan)

    def sup_over(mask, values, inf_mask, prof, seg_id, label):
        if not mask.any():
            flags.append(f"{label}: empty segment")
            return 0.0
        if inf_mask[mask].any():
            flags.append(f"{label}: INF_BAR inside segment")
        dev = np.where(inf_mask, np.inf, np.abs(values - prof))
        fresh = mask & (segment == 0)
        segment[fresh] = seg_id
        profile[fresh] = prof[fresh]
        deviation[fresh] = dev[fresh]
        return float(np.max(dev[mask]))

    u = (xs - 1) / n
    if tau1 is None:
        flags.append("tau1 undefined")
        seg1 = 0.0
    else:
        mask1 = (xs <= tau1) & (sa * u <= math.pi / 2 - eps)
        with np.errstate(invalid="ignore", over="ignore"):
            prof1 = sa * np.tan(sa * u)
        seg1 = sup_over(mask1, big_b, b_inf, prof1, 1, "segment 1")

    if tau1 is None or tau2 is None:
        flags.append("segment 2 undefined")
        seg2 = 0.0
    else:
        end2 = tau2 if tau is None else min(tau, tau2)
        mask2 = (xs >= tau1) & (xs <= end2)
        with np.errstate(invalid="ignore", over="ignore"):
            prof2 = np.tan(math.pi / 2 - (xs - 1) * sa / n) / sa
        seg2 = sup_over(mask2, big_a, a_inf, prof2, 2, "segment 2")

    if tau2 is None or tau_prime is None:
        flags.append("segment 3 undefined")
        seg3 = 0.0
    else:
        mask3 = (xs >= tau2) & (xs <= tau_prime)
        r_prev = np.concatenate([[0.0], rsum])  # r(1, x-1), with r(1, 0) := 0
        with np.errstate(invalid="ignore", over="ignore"):
            prof3 = sa * np.tan(sa * r_prev / n)
        seg3 = sup_over(mask3, big_b, b_inf, prof3, 3, "segment 3")

    if b_inf.any():
        flags.append(f"INF_BAR at x={[int(i) + 1 for i in np.flatnonzero(b_inf)]}")

    return TrajectoryReport(
        alpha=float(alpha),
        n=n,
        bvals=big_b,
        b_inf=b_inf,
        avals=big_a,
        a_inf=a_inf,
        tau1=tau1,
        tau2=tau2,
        tau=tau,
        tau_prime=tau_prime,
        sup_dev_seg1=seg1,
        sup_dev_seg2=seg2,
        sup_dev_seg3=seg3,
        segment=segment,
        profile=profile,
        deviation=deviation,
        flags=flags,
    )


# -- eigenfunction shape ----------------------------------------------------


@dataclass(frozen=True)
class ModeShape:
    mode: int
    sup_shape: float  # sup |g_j - h_j|, g_j(1) = 1 as solved
    sup_shape_normalized: float  # sup |g_j h_j(1) - h_j|
    sup_deriv: float  # sup |N (c grad g_j) - N grad h_j|
    lambda_ratio: float  # N^2 lambda_j / (j^2 pi^2); nan for j = 0


@dataclass(frozen=True)
class ShapeReport:
    modes: list[ModeShape]

    def _first(self) -> ModeShape:
        for m in self.modes:
            if m.mode == 1:
                return m
        raise LookupError("mode 1 not in report")

    @property
    def sup_shape(self) -> float:
        return self._first().sup_shape

    @property
    def sup_deriv(self) -> float:
        return self._first().sup_deriv

    def by_mode(self, j: int) -> ModeShape:
        return next(m for m in self.modes if m.mode == j)


def shape_report(
    env: Environment, pairs: Sequence[EigenPair], k0: Optional[int] = None
) -> ShapeReport:
    """Compare each supplied eigenpair (modes 0..K0) with its cosine profile.

    The weighted derivative N c(x-1,x)(g(x) - g(x-1)) is compared with
    N (h(x) - h(x-1)) on [[2, N]]; the boundary terms are 0 on both sides.
    """
    n = env.n
    if k0 is not None:
        if k0 >= n:
            raise ValueError(f"K0 must be < N={n}, got {k0}")
        pairs = [p for p in pairs if p.mode <= k0]
    out = []
    for pair in pairs:
        j = pair.mode
        if j >= n:
            raise ValueError(f"mode {j} out of range for N={n}")
        g = pair.values
        h = reference_profile(n, j)
        shape = float(np.max(np.abs(g - h)))
        normalized = float(np.max(np.abs(g * h[0] - h)))
        deriv = (
            float(np.max(np.abs(n * env.conductances * np.diff(g) - n * np.diff(h))))
            if n > 1
            else 0.0
        )
        ratio = math.nan if j == 0 else n * n * pair.lam / (j * j * math.pi**2)
        out.append(ModeShape(j, shape, normalized, deriv, ratio))
    return ShapeReport(out)

"""Angle (Pruefer-type) shooting for the spectrum of -Delta^(c).

For lambda > 0 the ratio b(lambda, x) = -(c grad f)(x) / f(x-1) of the
forward solution f with f(0) = f(1) = 1 obeys the Moebius step

    b(lambda, x+1) = b / (1 - b / c(x-1, x)) + lambda,    b(lambda, 1) = 0,

and takes values in the one-point compactification R u {INF_BAR}.  The
angle theta = k*pi + arctan(b) is carried as the pair (b, k): lambda is the
k-th eigenvalue iff theta(lambda, N+1) = k*pi, and theta is strictly
increasing in lambda, so every eigenvalue is found by bisection.

Branch rule for one step (b, k) -> (b', k'), with I(lambda, c) the closed
interval of fixed points of the step map:

    k' = k + [b in I(lambda, c)] + [b' < b]

where INF_BAR sits above every real (it is the top of its branch,
arctan = pi/2).  No arctan is evaluated on the solver path; the comparison
of b' and b is exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numba
import numpy as np

from .environment import Environment
from .operator import TridiagonalOperator, apply_generator

__all__ = [
    "INF_BAR",
    "AngleState",
    "EigenPair",
    "ShootingError",
    "xi_step",
    "fixed_interval",
    "in_fixed_interval",
    "phi_step",
    "angle_path",
    "terminal_angle",
    "ratio_path",
    "reconstruct_eigenvector",
    "twisted_eigenvector",
    "solve_eigenvalue",
    "full_spectrum",
    "DEFAULT_TOL",
    "MAX_BISECTIONS",
]

# bracket width of a few ulps: the forward reconstruction amplifies eigenvalue
# error by O(N^2), so the eigenvalue is pinned to working precision
DEFAULT_TOL = 2.0**-51
MAX_BISECTIONS = 200


class _InfBar:
    """The single point at infinity of the extended real line."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF_BAR"

    def __reduce__(self):
        return (_InfBar, ())


INF_BAR = _InfBar()
ExtReal = Union[float, _InfBar]


class ShootingError(RuntimeError):
    """Bisection could not bracket or converge; carries the offending values."""

    def __init__(self, message, **payload):
        super().__init__(message)
        self.payload = payload


def xi_step(c: float, lam: float, b: ExtReal) -> ExtReal:
    """One Moebius step b -> b / (1 - b/c) + lam on the extended line."""
    if not c > 0:
        raise ValueError(f"conductance must be > 0, got {c}")
    if b is INF_BAR:
        return lam - c
    d = c - b
    if d == 0.0:
        return INF_BAR
    return b * c / d + lam


def fixed_interval(c: float, lam: float) -> Optional[tuple[float, float]]:
    """Fixed points [b1, b2] of b -> xi_step(c, lam, b), or None if there are none."""
    if not c > 0:
        raise ValueError(f"conductance must be > 0, got {c}")
    if lam < 0:
        raise ValueError(f"lambda must be ≥ 0, got {lam}")
    if lam == 0:
        return (0.0, 0.0)
    excess = lam - 4.0 * c
    if excess < 0:
        return None
    b2 = 0.5 * (lam + math.sqrt(lam * excess))
    # product of the roots is lam * c; avoids cancellation in the small root
    return (lam * c / b2, b2)


def in_fixed_interval(c: float, lam: float, b: ExtReal) -> bool:
    if b is INF_BAR:
        return False
    interval = fixed_interval(c, lam)
    return interval is not None and interval[0] <= b <= interval[1]


def _ext_less(x: ExtReal, y: ExtReal) -> bool:
    if x is INF_BAR:
        return False
    if y is INF_BAR:
        return True
    return x < y


@dataclass(frozen=True)
class AngleState:
    """theta = branch * pi + arctan(b), with arctan(INF_BAR) = pi/2."""

    b: ExtReal = 0.0
    branch: int = 0

    @property
    def residual_angle(self) -> float:
        return math.pi / 2 if self.b is INF_BAR else math.atan(self.b)

    @property
    def theta(self) -> float:
        return self.branch * math.pi + self.residual_angle


def phi_step(c: float, lam: float, state: AngleState) -> AngleState:
    """Advance the angle by one site at spectral parameter lam > 0."""
    if not lam > 0:
        raise ValueError("phi_step needs lambda > 0; the lambda = 0 angle is identically 0")
    jump = in_fixed_interval(c, lam, state.b)
    b_new = xi_step(c, lam, state.b)
    branch = state.branch + int(jump) + int(_ext_less(b_new, state.b))
    return AngleState(b_new, branch)


def _step_conductances(env: Environment) -> np.ndarray:
    # step x -> x+1 uses c(x-1, x); the first step's c(0, 1) is arbitrary, fixed to 1
    return np.concatenate([[1.0], env.conductances])


def angle_path(env: Environment, lam: float) -> list[AngleState]:
    """theta(lam, x) for x = 1..N+1 via the scalar step (reference path)."""
    states = [AngleState(0.0, 0)]
    for c in _step_conductances(env):
        states.append(phi_step(float(c), lam, states[-1]))
    return states


# -- compiled kernels -------------------------------------------------------


@numba.njit(cache=True)
def _step(c, lam, b, inf):
    """Compiled twin of phi_step on the (b, inf) encoding; returns the branch increment."""
    jump = 0
    if not inf:
        excess = lam - 4.0 * c
        if excess >= 0.0:
            b2 = 0.5 * (lam + math.sqrt(lam * excess))
            if lam * c / b2 <= b <= b2:
                jump = 1
    if inf:
        return lam - c, False, jump + 1
    d = c - b
    if d == 0.0:
        return 0.0, True, jump
    nb = b * c / d + lam
    return nb, False, jump + (1 if nb < b else 0)


@numba.njit(cache=True)
def _shoot(cond, lam):
    b = 0.0
    inf = False
    k = 0
    for i in range(cond.size):
        b, inf, dk = _step(cond[i], lam, b, inf)
        k += dk
    return k, b, inf


@numba.njit(cache=True)
def _shoot_path(cond, lam):
    n = cond.size
    bs = np.zeros(n + 1)
    infs = np.zeros(n + 1, dtype=np.bool_)
    ks = np.zeros(n + 1, dtype=np.int64)
    b = 0.0
    inf = False
    k = 0
    for i in range(n):
        b, inf, dk = _step(cond[i], lam, b, inf)
        k += dk
        bs[i + 1] = b
        infs[i + 1] = inf
        ks[i + 1] = k
    return bs, infs, ks


@numba.njit(cache=True)
def _bisect(cond, j, lo, hi, tol, max_iter):
    it = 0
    while hi - lo > tol * hi:
        if it >= max_iter:
            return lo, hi, it, False
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        k, b, inf = _shoot(cond, mid)
        if k > j or (k == j and (inf or b >= 0.0)):
            hi = mid
        else:
            lo = mid
        it += 1
    return lo, hi, it, True


def _theta(branch: int, b: float, inf: bool) -> float:
    return branch * math.pi + (math.pi / 2 if inf else math.atan(b))


def terminal_angle(env: Environment, lam: float) -> tuple[float, int]:
    """theta(lam, N+1) and the number of eigenvalues in the open interval (0, lam)."""
    if not lam > 0:
        raise ValueError("terminal_angle needs lambda > 0")
    k, b, inf = _shoot(_step_conductances(env), float(lam))
    positive = inf or b > 0.0
    return _theta(k, b, inf), int(k if positive else k - 1)


def ratio_path(env: Environment, lam: float) -> tuple[list[ExtReal], np.ndarray]:
    """b(lam, x) and the branch index for x = 1..N+1 (index 0 is x = 1)."""
    bs, infs, ks = _shoot_path(_step_conductances(env), float(lam))
    values = [INF_BAR if flag else float(v) for v, flag in zip(bs, infs)]
    return values, ks


# Eigenvectors are reconstructed as mantissa/exponent pairs g(x) = m[x] * 2**e[x].
# A localised mode normalised by g(1) = 1 can peak far beyond the double range
# (log10 |g| > 300 already at N = 4096 for mid-band modes), so nothing below
# multiplies two large magnitudes together.


@numba.njit(cache=True)
def _renorm(m, e):
    if m == 0.0 or not math.isfinite(m):
        return m, e
    f, k = math.frexp(m)
    return f, e + k


@numba.njit(cache=True)
def _scaled_add(am, ae, bm, be):
    if am == 0.0:
        return _renorm(bm, be)
    if bm == 0.0:
        return _renorm(am, ae)
    top = max(ae, be)
    return _renorm(math.ldexp(am, ae - top) + math.ldexp(bm, be - top), top)


@numba.njit(cache=True)
def _reconstruct_scaled(edges, bs, infs, lam):
    # edges are c(1,2)..c(N-1,N); bs/infs are indexed by x-1 for x = 1..N+1
    n = edges.size + 1
    m = np.empty(n)
    e = np.zeros(n, dtype=np.int64)
    m[0] = 1.0
    gm = 0.0  # (c grad g)(x) = gm * 2**ge
    ge = 0
    for x in range(2, n + 1):
        c = edges[x - 2]
        pm = m[x - 2]
        pe = e[x - 2]
        if infs[x - 1]:
            # g(x-1) = 0, so b(x) carries no information; step the gradient instead
            gm, ge = _scaled_add(gm, ge, -lam * pm, pe)
            m[x - 1], e[x - 1] = _scaled_add(pm, pe, gm / c, ge)
        else:
            b = bs[x - 1]
            gm, ge = _renorm(-b * pm, pe)
            m[x - 1], e[x - 1] = _renorm((1.0 - b / c) * pm, pe)
    return m, e


def _scaled_forward(edges: np.ndarray, lam: float) -> tuple[np.ndarray, np.ndarray]:
    bs, infs, _ = _shoot_path(np.concatenate([[1.0], edges]), lam)
    return _reconstruct_scaled(edges, bs, infs, lam)


def reconstruct_eigenvector(env: Environment, lam: float) -> np.ndarray:
    """g(1) = 1, g(x) = [1 - r(x-1,x) b(lam, x)] g(x-1) for x = 2..N.

    Where b(lam, x) is INF_BAR (g(x-1) = 0) the step falls back to the
    equivalent gradient form g(x) = g(x-1) + (c grad g)(x) / c(x-1,x).
    Entries beyond the double range come back as +-inf.
    """
    m, e = _scaled_forward(np.asarray(env.conductances, dtype=float), float(lam))
    with np.errstate(over="ignore"):
        return np.ldexp(m, e)


def _twisted_scaled(env: Environment, lam: float):
    edges = np.asarray(env.conductances, dtype=float)
    lm, le = _scaled_forward(edges, lam)
    rm, re = _scaled_forward(edges[::-1].copy(), lam)
    rm, re = rm[::-1], re[::-1]
    op = TridiagonalOperator.from_env(env)
    with np.errstate(all="ignore"):
        # g(x-1)/g(x) from the left sweep and g(x+1)/g(x) from the right one
        left_ratio = np.ldexp(lm[:-1] / lm[1:], le[:-1] - le[1:])
        right_ratio = np.ldexp(rm[1:] / rm[:-1], re[1:] - re[:-1])
        gamma = op.diag - lam
        gamma[1:] += op.offdiag * left_ratio
        gamma[:-1] += op.offdiag * right_ratio
        gamma = np.where(np.isfinite(gamma), np.abs(gamma), np.inf)
    gamma[(lm == 0) | (rm == 0)] = np.inf
    t = int(np.argmin(gamma))
    gm = np.concatenate([lm[: t + 1], rm[t + 1 :] * (lm[t] / rm[t])])
    ge = np.concatenate([le[: t + 1], re[t + 1 :] + (le[t] - re[t])])
    gm, shift = np.frexp(gm)
    return gm, ge + shift, t + 1


def _eigenvector_parts(env: Environment, lam: float):
    """values (g(1)=1), shape (max|.|=1), log2 max|g|, log2 |g(N)|, twist site."""
    if env.n == 1:
        return np.ones(1), np.ones(1), 0.0, 0.0, 1
    gm, ge, twist = _twisted_scaled(env, float(lam))
    top = int(ge[gm != 0].max())
    shape = np.ldexp(gm, ge - top)
    peak = float(np.max(np.abs(shape)))
    shape /= peak
    log2_first = int(ge[0]) + math.log2(abs(gm[0]))
    log2_peak = top + math.log2(peak) - log2_first
    log2_tail = (
        int(ge[-1]) + math.log2(abs(gm[-1])) - log2_first if gm[-1] != 0 else -math.inf
    )
    with np.errstate(over="ignore"):
        values = np.ldexp(gm / gm[0], ge - ge[0])
    return values, shape, log2_peak, log2_tail, twist


def twisted_eigenvector(env: Environment, lam: float) -> tuple[np.ndarray, int]:
    """Eigenvector from ratio recursions run inward from both ends.

    The left end's recursion is kept on [[1, t]] and the mirrored one on
    [[t, N]], where the twist site t minimises the mismatch of row t of
    (-Delta - lam) g.  A single forward sweep is exponentially unstable past
    the centre of a localised mode.  Returns (g with g(1) = 1, t); entries
    too large for a double are +-inf, see EigenPair.shape for a finite copy.
    """
    values, _, _, _, twist = _eigenvector_parts(env, lam)
    return values, twist


@dataclass(frozen=True)
class EigenPair:
    """One eigenpair.  ``values`` has g(1) = 1 and can overflow for localised
    modes of large disordered environments; ``shape`` is the same vector
    scaled to sup-norm 1 and ``log2_peak`` is log2 max|g| on the g(1) = 1
    scale.  ``log2_tail`` is log2 |g(N)|, finite exactly when g(N) != 0 even
    if ``values[-1]`` underflows.  ``residual`` is the sup-norm of
    Delta u + lam u for u = shape.
    """

    mode: int
    lam: float
    values: np.ndarray = field(repr=False)
    residual: float
    terminal_defect: float = 0.0
    iterations: int = 0
    twist: int = 1
    shape: Optional[np.ndarray] = field(default=None, repr=False)
    log2_peak: float = 0.0
    log2_tail: Optional[float] = None

    def __post_init__(self):
        if self.shape is None:
            peak = float(np.max(np.abs(self.values)))
            object.__setattr__(self, "shape", self.values / peak)
            object.__setattr__(self, "log2_peak", math.log2(peak))
        if self.log2_tail is None:
            tail = abs(float(self.values[-1]))
            object.__setattr__(self, "log2_tail", math.log2(tail) if tail else -math.inf)


def solve_eigenvalue(env: Environment, mode: int, tol: float = DEFAULT_TOL) -> EigenPair:
    """Bisect theta(lam, N+1) >= mode * pi on (0, Gershgorin bound]."""
    n = env.n
    if not 1 <= mode <= n - 1:
        raise ValueError(f"mode must lie in [1, {n - 1}], got {mode}")
    if not tol > 0:
        raise ValueError("tol must be > 0")
    cond = _step_conductances(env)
    # the bound can equal lambda_max exactly (N = 2 always), where rounding
    # decides the side of the branch; a few ulps of headroom settle it
    hi = TridiagonalOperator.from_env(env).gershgorin_bound() * (1.0 + 16 * np.finfo(float).eps)
    k, b, inf = _shoot(cond, hi)
    if not (k > mode or (k == mode and (inf or b >= 0.0))):
        raise ShootingError(
            "upper bracket does not reach the requested branch",
            lam=hi,
            theta=_theta(k, b, inf),
            target=mode * math.pi,
        )
    lo, hi, iterations, ok = _bisect(cond, mode, 0.0, hi, tol, MAX_BISECTIONS)
    if not ok:
        raise ShootingError(
            "bisection did not converge", lo=lo, hi=hi, iterations=iterations
        )
    lam = 0.5 * (lo + hi)
    bs, infs, _ = _shoot_path(cond, lam)
    values, shape, log2_peak, log2_tail, twist = _eigenvector_parts(env, lam)
    residual = float(np.max(np.abs(apply_generator(env, shape) + lam * shape)))
    defect = math.inf if infs[-1] else abs(float(bs[-1]))
    return EigenPair(
        mode, lam, values, residual, defect, int(iterations), twist, shape, log2_peak, log2_tail
    )


def full_spectrum(env: Environment, tol: float = DEFAULT_TOL) -> list[EigenPair]:
    pairs = [EigenPair(0, 0.0, np.ones(env.n), 0.0)]
    pairs.extend(solve_eigenvalue(env, j, tol) for j in range(1, env.n))
    return pairs

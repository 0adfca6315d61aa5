"""Conductance environments on the segment [[1, N]].

An environment stores the N-1 edge conductances c(x, x+1); resistances
r(x, x+1) = 1/c(x, x+1) are derived on demand.  The uniform weight 1/N of
the invariant measure is implicit and never stored.

Random environments draw IID *resistances* and invert them.  Edge ``i``
(0-based) always consumes the ``i``-th 64-bit output of a Philox4x64
counter-based generator keyed by the seed, so the first ``m`` edges of an
environment do not depend on ``n`` and draws are portable across platforms.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np
from scipy.special import ndtri

__all__ = [
    "Environment",
    "LlnDiagnostics",
    "Uniform",
    "LogNormal",
    "Pareto",
    "make_homogeneous",
    "make_iid",
    "edge_uniforms",
    "lln_diagnostics",
    "lln_diagnostics_bruteforce",
    "parse_distribution",
    "load_environment",
    "save_environment",
]


@dataclass(frozen=True)
class Environment:
    """Positive conductances on the N-1 edges of [[1, N]]."""

    n: int
    conductances: np.ndarray = field(repr=False)
    label: str = ""
    seed: Optional[int] = None

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise TypeError("n must be an integer")
        if self.n < 1:
            raise ValueError("n must be ≥ 1")
        c = np.array(self.conductances, dtype=float).reshape(-1)
        if c.size != self.n - 1:
            raise ValueError(
                f"expected {self.n - 1} conductances for n={self.n}, got {c.size}"
            )
        if not np.all(np.isfinite(c)) or np.any(c <= 0):
            raise ValueError("conductances must be finite and > 0")
        c.setflags(write=False)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "conductances", c)
        if self.seed is not None:
            object.__setattr__(self, "seed", int(self.seed))

    @property
    def resistances(self) -> np.ndarray:
        return 1.0 / self.conductances

    def __eq__(self, other):
        if not isinstance(other, Environment):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.conductances, other.conductances)
            and self.label == other.label
            and self.seed == other.seed
        )

    def __hash__(self):
        return hash((self.n, self.conductances.tobytes(), self.label, self.seed))

    def to_json(self) -> str:
        # json emits floats via repr, the shortest round-tripping decimal
        payload = {
            "n": self.n,
            "conductances": [float(v) for v in self.conductances],
            "label": self.label,
            "seed": self.seed,
        }
        return json.dumps(payload, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Environment":
        data = json.loads(text)
        missing = {"n", "conductances"} - set(data)
        if missing:
            raise ValueError(f"environment file missing keys: {sorted(missing)}")
        return cls(
            n=data["n"],
            conductances=np.asarray(data["conductances"], dtype=float),
            label=data.get("label", ""),
            seed=data.get("seed"),
        )


def save_environment(env: Environment, path: Union[str, Path]) -> None:
    Path(path).write_text(env.to_json(), newline="\n")


def load_environment(path: Union[str, Path]) -> Environment:
    return Environment.from_json(Path(path).read_text())


def make_homogeneous(n: int) -> Environment:
    if n < 1:
        raise ValueError("n must be ≥ 1")
    return Environment(n, np.ones(n - 1), label="homogeneous")


# -- IID resistance laws ---------------------------------------------------


@dataclass(frozen=True)
class Uniform:
    """Resistances uniform on [a, b]."""

    a: float
    b: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"uniform: field 'a' must be > 0, got {self.a}")
        if not self.b >= self.a:
            raise ValueError(f"uniform: field 'b' must be ≥ a, got {self.b}")

    def resistances(self, u: np.ndarray) -> np.ndarray:
        return self.a + (self.b - self.a) * u

    def __str__(self):
        return f"uniform:{self.a!r},{self.b!r}"


@dataclass(frozen=True)
class LogNormal:
    """log r ~ Normal(m, s^2)."""

    m: float
    s: float

    def __post_init__(self):
        if not math.isfinite(self.m):
            raise ValueError(f"lognormal: field 'm' must be finite, got {self.m}")
        if not self.s > 0:
            raise ValueError(f"lognormal: field 's' must be > 0, got {self.s}")

    def resistances(self, u: np.ndarray) -> np.ndarray:
        return np.exp(self.m + self.s * ndtri(u))

    def __str__(self):
        return f"lognormal:{self.m!r},{self.s!r}"


@dataclass(frozen=True)
class Pareto:
    """r = U^(-1/alpha); infinite mean for alpha < 1."""

    alpha: float

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(
                f"pareto: field 'alpha' must lie in (0, 1), got {self.alpha}"
            )

    def resistances(self, u: np.ndarray) -> np.ndarray:
        return u ** (-1.0 / self.alpha)

    def __str__(self):
        return f"pareto:{self.alpha!r}"


Distribution = Union[Uniform, LogNormal, Pareto]

_DIST_RE = re.compile(r"^(homog|uniform|lognormal|pareto)(?::(.*))?$")


def parse_distribution(text: str) -> Optional[Distribution]:
    """Parse ``homog``, ``uniform:a,b``, ``lognormal:m,s`` or ``pareto:alpha``.

    Returns None for ``homog``.
    """
    match = _DIST_RE.match(text.strip())
    if not match:
        raise ValueError(f"unknown distribution {text!r}")
    name, params = match.groups()
    args = [] if not params else [float(p) for p in params.split(",")]
    arity = {"homog": 0, "uniform": 2, "lognormal": 2, "pareto": 1}[name]
    if len(args) != arity:
        raise ValueError(f"{name} takes {arity} parameter(s), got {len(args)}")
    if name == "homog":
        return None
    return {"uniform": Uniform, "lognormal": LogNormal, "pareto": Pareto}[name](*args)


def edge_uniforms(seed: int, count: int) -> np.ndarray:
    """Uniforms in (0, 1), one per edge, from the seed's Philox stream.

    Value ``i`` is ``(w_i >> 11) + 0.5`` scaled by 2^-53, where ``w_i`` is
    the i-th raw 64-bit Philox4x64 output with key ``seed``.
    """
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    bitgen = np.random.Philox(key=seed)
    raw = bitgen.random_raw(count) if count else np.zeros(0, dtype=np.uint64)
    raw = np.asarray(raw, dtype=np.uint64)
    return ((raw >> np.uint64(11)).astype(float) + 0.5) * 2.0**-53


def make_iid(n: int, distribution: Distribution, seed: int) -> Environment:
    if n < 1:
        raise ValueError("n must be ≥ 1")
    u = edge_uniforms(seed, n - 1)
    r = np.asarray(distribution.resistances(u), dtype=float)
    return Environment(n, 1.0 / r, label=str(distribution), seed=seed)


# -- LLN diagnostics --------------------------------------------------------


@dataclass(frozen=True)
class LlnDiagnostics:
    delta0: float
    delta1: float
    argmax_window: tuple[int, int]


def lln_diagnostics(env: Environment) -> LlnDiagnostics:
    """delta0 = max window |r(n,m) - (m-n)| / N via prefix sums; delta1 = max r / N."""
    if env.n < 2:
        raise ValueError("LLN diagnostics need n ≥ 2 (at least one edge)")
    # prefix[k] = sum over the first k edges of (r - 1); site m <-> prefix[m-1]
    prefix = np.concatenate([[0.0], np.cumsum(env.resistances - 1.0)])
    i_max, i_min = int(np.argmax(prefix)), int(np.argmin(prefix))
    delta0 = (prefix[i_max] - prefix[i_min]) / env.n
    lo, hi = sorted((i_min, i_max))
    if lo == hi:
        lo, hi = 0, 1
    return LlnDiagnostics(
        delta0=float(delta0),
        delta1=float(env.resistances.max() / env.n),
        argmax_window=(lo + 1, hi + 1),
    )


def lln_diagnostics_bruteforce(env: Environment) -> float:
    """O(N^2) double loop over windows 1 <= n < m <= N; returns delta0."""
    r = env.resistances
    best = 0.0
    for n in range(1, env.n):
        acc = 0.0
        for m in range(n + 1, env.n + 1):
            acc += r[m - 2]
            best = max(best, abs(acc - (m - n)))
    return best / env.n


def resistance_partial_sums(env: Environment) -> np.ndarray:
    """r(1, x) for x = 1..N (r(1,1) = 0)."""
    return np.concatenate([[0.0], np.cumsum(env.resistances)])


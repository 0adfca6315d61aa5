"""The generator of the conductance walk and its quadratic forms.

Inner products use the uniform measure mu_N(x) = 1/N.  Sums are accumulated
with ``math.fsum`` so the Rayleigh quotients stay accurate at N in the
thousands, where eigenvalues are of order 1e-7.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .environment import Environment

__all__ = [
    "TridiagonalOperator",
    "apply_generator",
    "weighted_gradient",
    "inner",
    "variance",
    "dirichlet_form",
    "rayleigh_quotient",
]


@dataclass(frozen=True)
class TridiagonalOperator:
    """Symmetric tridiagonal matrix of -Delta^(c) (missing boundary edges count 0)."""

    diag: np.ndarray
    offdiag: np.ndarray

    @classmethod
    def from_env(cls, env: Environment) -> "TridiagonalOperator":
        c = env.conductances
        padded = np.concatenate([[0.0], c, [0.0]])
        return cls(diag=padded[:-1] + padded[1:], offdiag=-c.copy())

    @property
    def n(self) -> int:
        return self.diag.size

    def gershgorin_bound(self) -> float:
        """2 * max row diagonal; every eigenvalue lies in [0, this]."""
        return float(2.0 * self.diag.max()) if self.n else 0.0

    def matvec(self, f: np.ndarray) -> np.ndarray:
        out = self.diag * f
        out[:-1] += self.offdiag * f[1:]
        out[1:] += self.offdiag * f[:-1]
        return out

    def dense(self) -> np.ndarray:
        return (
            np.diag(self.diag)
            + np.diag(self.offdiag, 1)
            + np.diag(self.offdiag, -1)
        )


def _check(env: Environment, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (env.n,):
        raise ValueError(f"expected a vector of length {env.n}, got shape {f.shape}")
    return f


def weighted_gradient(env: Environment, f) -> np.ndarray:
    """(c grad f)(x) = c(x-1,x)[f(x) - f(x-1)] for x = 1..N+1, zero at both ends."""
    f = _check(env, f)
    grad = np.zeros(env.n + 1)
    grad[1:-1] = env.conductances * np.diff(f)
    return grad


def apply_generator(env: Environment, f) -> np.ndarray:
    """(Delta f)(x) = (c grad f)(x+1) - (c grad f)(x)."""
    return np.diff(weighted_gradient(env, f))


def inner(f, g) -> float:
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    return math.fsum(f * g) / f.size


def variance(f) -> float:
    f = np.asarray(f, dtype=float)
    centred = f - math.fsum(f) / f.size
    return math.fsum(centred * centred) / f.size


def dirichlet_form(env: Environment, f) -> float:
    """E_N(f) = sum_x (1/N) c(x,x+1) (f(x+1) - f(x))^2."""
    f = _check(env, f)
    d = np.diff(f)
    return math.fsum(env.conductances * d * d) / env.n


def rayleigh_quotient(env: Environment, f) -> float:
    f = _check(env, f)
    var = variance(f)
    if var <= 0.0:
        raise ValueError("zero variance: the Rayleigh quotient is undefined")
    return dirichlet_form(env, f) / var

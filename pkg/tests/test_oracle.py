import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import rcgap.oracle as oracle
from conftest import random_environments
from rcgap.environment import LogNormal, Uniform, make_homogeneous, make_iid
from rcgap.operator import TridiagonalOperator
from rcgap.oracle import (
    OracleError,
    inverse_iteration,
    oracle_eigenvalues,
    oracle_spectrum,
    sturm_count,
    sturm_counts,
)
from rcgap.shooting import full_spectrum


def test_sturm_count_homogeneous_four():
    # 0 and 2 - sqrt(2) both lie below 1
    op = TridiagonalOperator.from_env(make_homogeneous(4))
    assert sturm_count(op, 1.0).negcount == 2
    assert sturm_count(op, 1.0).lam == 1.0


@pytest.mark.parametrize("seed", range(10))
def test_sturm_count_extremes(seed):
    env = random_environments(10)[seed]
    op = TridiagonalOperator.from_env(env)
    assert sturm_count(op, -1e-9).negcount == 0
    assert sturm_count(op, op.gershgorin_bound() * (1 + 1e-12) + 1e-300).negcount == env.n


@given(st.integers(1, 50), st.integers(0, 2**63), st.lists(st.floats(-1.0, 8.0), min_size=2, max_size=20))
def test_negcount_is_nondecreasing(n, seed, lams):
    op = TridiagonalOperator.from_env(make_iid(n, LogNormal(0.0, 1.0), seed))
    lams = np.sort(lams)
    counts = sturm_counts(op, lams)
    assert np.all(np.diff(counts) >= 0)


def test_oracle_spectrum_examples():
    lams = [lam for lam, _ in oracle_spectrum(make_homogeneous(4))]
    np.testing.assert_allclose(lams, [0, 2 - math.sqrt(2), 2, 2 + math.sqrt(2)], atol=1e-13)
    ((lam, vec),) = oracle_spectrum(make_homogeneous(1))
    assert lam == 0.0 and vec.tolist() == [1.0]


def test_oracle_agrees_with_shooting_on_seed_3():
    env = make_iid(12, Uniform(0.5, 1.5), 3)
    ref = oracle_spectrum(env)
    got = full_spectrum(env)
    top = ref[-1][0]
    for (lam, vec), pair in zip(ref, got):
        assert abs(lam - pair.lam) <= 1e-8 * top
        assert vec[0] == 1.0
        np.testing.assert_allclose(vec, pair.values, atol=1e-8 * np.max(np.abs(vec)))


@pytest.mark.parametrize("seed", range(6))
def test_distinct_and_count_consistent(seed):
    law = [Uniform(0.5, 1.5), LogNormal(-0.5, 1.0)][seed % 2]
    env = make_iid(256, law, seed)
    op = TridiagonalOperator.from_env(env)
    tol = 1e-14
    lams = oracle_eigenvalues(op, tol)
    assert np.min(np.diff(lams)) > 10 * tol * lams[-1]
    mids = 0.5 * (lams[:-1] + lams[1:])
    np.testing.assert_array_equal(sturm_counts(op, mids), np.arange(1, env.n))


def test_eigenvalues_match_dense_solver():
    for env in random_environments(20, n_min=3):
        op = TridiagonalOperator.from_env(env)
        np.testing.assert_allclose(
            oracle_eigenvalues(op), np.linalg.eigvalsh(op.dense()), atol=1e-12 * op.gershgorin_bound()
        )


def test_inverse_iteration_vectors_are_eigenvectors():
    env = make_iid(64, LogNormal(-0.5, 1.0), 4)
    op = TridiagonalOperator.from_env(env)
    for lam, vec in oracle_spectrum(env):
        u = vec / np.linalg.norm(vec)
        assert np.max(np.abs(op.matvec(u) - lam * u)) <= 1e-10 * op.gershgorin_bound()


def test_validation_and_failure(monkeypatch):
    op = TridiagonalOperator.from_env(make_homogeneous(5))
    with pytest.raises(ValueError):
        oracle_eigenvalues(op, tol=0.0)
    monkeypatch.setattr(oracle, "MAX_INVERSE_ITERATIONS", 0)
    with pytest.raises(OracleError):
        inverse_iteration(op, 0.5)

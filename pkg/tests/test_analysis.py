import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import env_from_conductances, random_environments
from rcgap.analysis import (
    b_trajectory,
    count_extrema,
    gradient_identity_defect,
    min_decrement,
    reference_profile,
    reference_ratio_path,
    shape_report,
)
from rcgap.environment import LogNormal, Uniform, make_homogeneous, make_iid
from rcgap.shooting import EigenPair, full_spectrum, ratio_path, solve_eigenvalue


# -- extrema -------------------------------------------------------------------


def test_strictly_decreasing_has_no_extrema():
    rep = count_extrema(np.linspace(3, -1, 17))
    assert (rep.count, rep.monotone_degree, rep.extrema) == (0, 1, [])


def test_h2_on_six_sites_has_one_min_plateau():
    c = math.cos(math.pi / 6)
    rep = count_extrema([c, 0.0, -c, -c, 0.0, c])
    assert rep.count == 1 and rep.monotone_degree == 2
    (ext,) = rep.extrema
    assert (ext.start, ext.stop, ext.kind) == (3, 4, "min")


def test_homogeneous_modes_on_sixty_sites():
    assert [count_extrema(reference_profile(60, j)).count for j in range(1, 6)] == [0, 1, 2, 3, 4]


def test_endpoints_are_never_extrema():
    assert count_extrema([5.0, 0.0, 1.0, 2.0, 3.0, -4.0]).extrema[0].start == 2
    assert count_extrema([0.0, 5.0]).count == 0
    assert count_extrema([1.0, 1.0, 1.0]).count == 0


def test_extrema_validation():
    with pytest.raises(ValueError):
        count_extrema([1.0])
    with pytest.raises(ValueError):
        count_extrema([1.0, 2.0], plateau_tol=-1)


@given(st.lists(st.integers(-3, 3), min_size=2, max_size=30))
def test_extrema_alternate_and_are_disjoint(values):
    rep = count_extrema(np.array(values, dtype=float))
    kinds = [e.kind for e in rep.extrema]
    assert all(a != b for a, b in zip(kinds, kinds[1:]))
    spans = [(e.start, e.stop) for e in rep.extrema]
    assert all(s1[1] < s2[0] for s1, s2 in zip(spans, spans[1:]))
    assert all(2 <= s and e <= len(values) - 1 for s, e in spans)
    assert rep.monotone_degree == rep.count + 1


def test_tiny_tail_oscillations_still_count():
    # a localised profile whose tail carries genuine sign changes far below the peak
    f = np.array([1e-14, -1e-13, 1e-12, 1.0, 0.5, 0.1])
    assert count_extrema(f).count == 2


# -- eigenfunction structure --------------------------------------------------------

laws = st.sampled_from([Uniform(0.5, 1.5), LogNormal(-0.5, 1.0), Uniform(0.05, 3.0)])


@settings(max_examples=40)
@given(st.integers(2, 40), laws, st.integers(0, 2**63))
def test_j_monotone_and_decreasing_g1(n, law, seed):
    env = make_iid(n, law, seed)
    pairs = full_spectrum(env)
    for pair in pairs[1:]:
        assert count_extrema(pair.shape).count == pair.mode - 1
    assert min_decrement(pairs[1].values) > 0


def test_zero_sum_and_gradient_identity():
    for env in random_environments(60):
        for pair in full_spectrum(env)[1:]:
            assert abs(math.fsum(pair.shape)) <= 1e-9 * env.n
            assert gradient_identity_defect(env, pair) <= 1e-9


def test_forward_recursion_reproduces_g1():
    for seed, law in enumerate([Uniform(0.5, 1.5), LogNormal(-0.5, 1.0)] * 3):
        env = make_iid(256, law, seed)
        pair = solve_eigenvalue(env, 1)
        big_b = b_trajectory(env, pair.lam * env.n**2).bvals
        r = env.resistances
        g = np.ones(env.n)
        for x in range(2, env.n + 1):
            g[x - 1] = (1.0 - r[x - 2] * big_b[x - 1] / env.n) * g[x - 2]
        assert np.max(np.abs(g - pair.values)) <= 1e-10


def test_homogeneous_twin_rebuilds_cosine():
    for n in (8, 100, 1000):
        _, h = reference_ratio_path(n)
        np.testing.assert_allclose(h, reference_profile(n, 1), atol=1e-11)


# -- trajectories -------------------------------------------------------------------


def test_homogeneous_trajectory_at_4096():
    rep = b_trajectory(make_homogeneous(4096), math.pi**2)
    assert rep.sup_dev_seg1 <= 0.02
    assert abs(rep.terminal_ratio) <= 1e-3
    assert rep.flags == []
    assert rep.tau1 <= rep.tau2


def test_homogeneous_trajectory_at_1024():
    rep = b_trajectory(make_homogeneous(1024), math.pi**2)
    assert rep.sup_dev_seg1 <= 0.05


@pytest.mark.parametrize("seed", range(8))
def test_second_site_is_alpha_over_n(seed):
    env = random_environments(8, n_min=3)[seed]
    alpha = 0.5 + 3 * seed
    assert b_trajectory(env, alpha).bvals[1] == alpha / env.n


@pytest.mark.parametrize("seed", range(6))
def test_trajectory_is_rescaled_ratio_path(seed):
    env = make_iid(300, [Uniform(0.5, 1.5), LogNormal(-0.5, 1.0)][seed % 2], seed)
    alpha = 2.0 + seed
    rep = b_trajectory(env, alpha)
    values, _ = ratio_path(env, alpha / env.n**2)
    for big, small, inf in zip(rep.bvals, values, rep.b_inf):
        if inf:
            continue
        assert big == pytest.approx(env.n * small, rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_lln_trajectory_orders_taus(seed):
    env = make_iid(2048, Uniform(0.5, 1.5), seed)
    rep = b_trajectory(env, math.pi**2)
    assert rep.tau1 <= rep.tau2
    for dev in (rep.sup_dev_seg1, rep.sup_dev_seg2, rep.sup_dev_seg3):
        assert math.isfinite(dev)


def test_pole_on_two_sites_is_flagged_not_raised():
    env = make_homogeneous(2)
    rep = b_trajectory(env, 4.0)
    assert any("INF_BAR" in f for f in rep.flags)
    assert rep.b_inf[-1]


def test_trajectory_validation():
    with pytest.raises(ValueError):
        b_trajectory(make_homogeneous(5), 0.0)
    with pytest.raises(ValueError):
        b_trajectory(make_homogeneous(1), 1.0)


# -- shape report -------------------------------------------------------------------


@pytest.mark.parametrize("n", [4, 16, 200, 2000])
def test_homogeneous_shape_report(n):
    env = make_homogeneous(n)
    pairs = [EigenPair(0, 0.0, np.ones(n), 0.0), solve_eigenvalue(env, 1)]
    rep = shape_report(env, pairs)
    assert rep.by_mode(0).sup_shape == 0.0 and rep.by_mode(0).sup_deriv == 0.0
    first = rep.by_mode(1)
    assert first.sup_shape_normalized <= 1e-8
    # raw distance is the g(1) = 1 normalisation mismatch, max|h| (1/cos(pi/2N) - 1)
    expected = max(np.abs(reference_profile(n, 1))) * (1 / math.cos(math.pi / (2 * n)) - 1)
    assert first.sup_shape == pytest.approx(expected, rel=1e-4, abs=1e-10)
    assert first.lambda_ratio == pytest.approx(n * n * 2 * (1 - math.cos(math.pi / n)) / math.pi**2)
    assert math.isnan(rep.by_mode(0).lambda_ratio)


def test_shape_report_rejects_large_k0():
    env = make_homogeneous(5)
    with pytest.raises(ValueError):
        shape_report(env, full_spectrum(env), k0=5)
    assert len(shape_report(env, full_spectrum(env), k0=2).modes) == 3


def test_weighted_derivative_uses_conductances():
    env = env_from_conductances([2.0, 0.5])
    pair = EigenPair(1, 1.0, np.array([1.0, 0.0, -1.0]), 0.0)
    rep = shape_report(env, [pair])
    h = reference_profile(3, 1)
    expected = max(abs(3 * 2.0 * -1.0 - 3 * (h[1] - h[0])), abs(3 * 0.5 * -1.0 - 3 * (h[2] - h[1])))
    assert rep.by_mode(1).sup_deriv == pytest.approx(expected)

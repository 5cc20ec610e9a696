"""Environment model: windows, ladder structure, tail exponent, classification."""

import json
import math

import numpy as np
import pytest

from rwre.environment import (
    EnvDistribution,
    RejectionBudgetError,
    WindowError,
    alpha_for_s,
    homogeneous_family,
    ladder_decompose,
    pi_product,
    potential,
    rho,
    sample_window_P,
    sample_window_Q,
    solomon_classify,
    solve_s,
    truncated_w_series,
    two_point_family,
    w_sum,
    window_from_values,
)
from rwre.rng import derive


def env_from_rhos(rhos, lo=0):
    return window_from_values([1.0 / (1.0 + r) for r in rhos], lo=lo)


# ---------------------------------------------------------------------------
# site functionals
# ---------------------------------------------------------------------------


def test_rho_values():
    assert rho(0.5) == 1.0
    assert rho(2 / 3) == pytest.approx(0.5, abs=1e-15)
    assert rho(0.75) == pytest.approx(1 / 3, abs=1e-15)
    for bad in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(ValueError):
            rho(bad)


def test_pi_product_examples():
    env = window_from_values([2 / 3] * 3)
    assert pi_product(env, 0, 2) == pytest.approx(1 / 8, abs=1e-15)
    assert pi_product(env, 1, 0) == 1.0
    env2 = window_from_values([1 / 3, 2 / 3, 2 / 3])
    assert pi_product(env2, 0, 2) == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(WindowError):
        pi_product(env2, 0, 3)


def test_pi_product_splits_at_any_midpoint():
    env = sample_window_P(two_point_family(0.3), 11, 0, 40)
    for i, j, k in [(0, 0, 5), (2, 7, 19), (3, 3, 3), (0, 20, 40), (5, 4, 9)]:
        # i <= j <= k split; j may equal i-1 edge via the empty convention
        assert pi_product(env, i, k) == pytest.approx(
            pi_product(env, i, j) * pi_product(env, j + 1, k), rel=1e-12
        )


def test_w_sum_examples():
    geo = window_from_values([0.75] * 41, lo=-40)
    assert w_sum(geo, 0, 40) == pytest.approx(0.5, abs=1e-12)
    env = env_from_rhos([1.7, 0.4, 2.0, 0.5])
    assert w_sum(env, 3, 1) == pytest.approx(0.5, abs=1e-15)
    assert w_sum(env, 3, 2) == pytest.approx(1.5, abs=1e-15)
    with pytest.raises(ValueError):
        w_sum(env, 3, 0)


def test_w_sum_monotone_increment_is_pi():
    env = sample_window_P(two_point_family(0.25), 5, -30, 10)
    j = 4
    for depth in range(1, 30):
        inc = w_sum(env, j, depth + 1) - w_sum(env, j, depth)
        assert inc > 0.0
        assert inc == pytest.approx(pi_product(env, j - depth, j), rel=1e-12)


def test_truncated_w_series_matches_w_sum():
    env = sample_window_P(two_point_family(0.25), 6, 0, 20)
    series = truncated_w_series(env.rho_slice(0, 20))
    for j in range(21):
        assert series[j] == pytest.approx(w_sum(env, j, j + 1), rel=1e-13)


def test_potential_examples():
    env = window_from_values([2 / 3] * 7, lo=-3)
    assert potential(env, 0) == 0.0
    assert potential(env, 3) == pytest.approx(3 * math.log(0.5), abs=1e-12)
    assert potential(env, -2) == pytest.approx(2 * math.log(2.0), abs=1e-12)


# ---------------------------------------------------------------------------
# distributions
# ---------------------------------------------------------------------------


def test_env_distribution_validation():
    with pytest.raises(ValueError):
        EnvDistribution(atoms=(), kappa=0.3)
    with pytest.raises(ValueError):
        EnvDistribution(atoms=((0.4, 0.5), (0.6, 0.4)), kappa=0.3)  # weights != 1
    with pytest.raises(ValueError):
        EnvDistribution(atoms=((0.1, 1.0),), kappa=0.3)  # ellipticity violated
    with pytest.raises(ValueError):
        EnvDistribution(atoms=((0.4, 1.0),), kappa=0.7)


def test_env_distribution_json_round_trip():
    dist = two_point_family(0.2)
    again = EnvDistribution.from_json(dist.to_json())
    assert again == dist
    # dict form accepted too
    assert EnvDistribution.from_json(json.loads(dist.to_json())) == dist


def test_two_point_family_atoms():
    dist = two_point_family(0.2)
    assert sorted(dist.rhos) == pytest.approx([0.5, 2.0], abs=1e-15)
    assert dist.weights[np.argmax(dist.rhos)] == pytest.approx(0.2)
    assert dist.kappa == pytest.approx(1 / 3)


def test_alpha_for_s_inverts_closed_form():
    for s in (0.29, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0):
        alpha = alpha_for_s(s)
        assert math.log2((1 - alpha) / alpha) == pytest.approx(s, abs=1e-12)


# ---------------------------------------------------------------------------
# tail exponent and classification
# ---------------------------------------------------------------------------


def test_solve_s_two_point_closed_form():
    for alpha, s in [(1 / 3, 1.0), (1 / 5, 2.0), (1 / 9, 3.0), (1 / 17, 4.0)]:
        out = solve_s(two_point_family(alpha))
        assert abs(out.s - s) <= 1e-10
        lo, hi = out.bracket
        assert lo < out.s < hi
        dist = two_point_family(alpha)
        assert dist.rho_moment(lo) < 1.0 < dist.rho_moment(hi)


def test_solve_s_infinite_sentinel_when_rho_below_one():
    out = solve_s(homogeneous_family(0.75))
    assert out.s == math.inf


def test_solve_s_rejects_non_transient():
    with pytest.raises(ValueError):
        solve_s(homogeneous_family(0.5))
    with pytest.raises(ValueError):
        solve_s(two_point_family(0.6))  # drifts left


def test_rho_moment_convex_through_both_roots():
    dist = two_point_family(1 / 5)
    assert dist.rho_moment(0.0) == pytest.approx(1.0, abs=1e-15)
    assert dist.rho_moment(2.0) == pytest.approx(1.0, abs=1e-12)
    for gamma in (0.5, 1.0, 1.5):
        assert dist.rho_moment(gamma) < 1.0
    for gamma in (-0.5, 2.5):
        assert dist.rho_moment(gamma) > 1.0


def test_solomon_classification():
    regime, speed = solomon_classify(two_point_family(1 / 5))
    assert regime == "transient-right"
    assert speed == pytest.approx(1 / 9, abs=1e-15)
    regime, speed = solomon_classify(homogeneous_family(0.5))
    assert regime == "recurrent"
    assert speed == 0.0
    regime, speed = solomon_classify(two_point_family(1 / 3))
    assert regime == "transient-right"
    assert speed == 0.0  # E rho = 1 boundary
    regime, speed = solomon_classify(homogeneous_family(0.25))
    assert regime == "transient-left"
    assert speed == pytest.approx(-0.5, abs=1e-15)


# ---------------------------------------------------------------------------
# window sampling
# ---------------------------------------------------------------------------


def test_sample_window_P_is_pure():
    dist = two_point_family(0.3)
    a = sample_window_P(dist, 77, 0, 10)
    b = sample_window_P(dist, 77, 0, 10)
    assert np.array_equal(a.omega, b.omega)
    c = sample_window_P(dist, 77, 5, 15)
    assert np.array_equal(a.omega[5:], c.omega[:6])
    d = a.extended(hi=15)
    assert np.array_equal(d.omega, np.concatenate([a.omega, c.omega[6:]]))
    assert not np.array_equal(a.omega, sample_window_P(dist, 78, 0, 10).omega)


def test_sample_window_P_atom_frequencies():
    dist = two_point_family(0.3)
    env = sample_window_P(dist, 1234, 0, 10**6 - 1)
    frac = float(np.mean(env.omega < 0.5))
    assert abs(frac - 0.3) < 4.0 * math.sqrt(0.3 * 0.7 / 10**6)


def test_sample_window_Q_acceptance_predicate():
    dist = two_point_family(0.2)
    for seed in range(30):
        env = sample_window_Q(dist, seed, 24, 8)
        left = env.log_rhos[: env.index(0)]
        partial = np.cumsum(left[::-1])
        assert np.all(partial < 0.0)


def test_sample_window_Q_right_sites_match_P():
    dist = two_point_family(0.2)
    q = sample_window_Q(dist, 99, 16, 40)
    p = sample_window_P(dist, 99, 0, 40)
    assert np.array_equal(q.omega[q.index(0) :], p.omega)


def test_sample_window_Q_homogeneous_always_accepts():
    env = sample_window_Q(homogeneous_family(0.75), 5, 32, 8)
    assert np.all(env.omega == 0.75)


def test_sample_window_Q_rejects_recurrent_law():
    with pytest.raises(ValueError):
        sample_window_Q(homogeneous_family(0.5), 0, 8, 8)


def test_sample_window_Q_budget_error():
    # alpha near the recurrence boundary makes the left condition very
    # unlikely at depth 48, so a tiny attempt budget must trip
    dist = two_point_family(0.49)
    with pytest.raises(RejectionBudgetError):
        for seed in range(20):
            sample_window_Q(dist, seed, 48, 0, max_attempts=1)


def test_q_window_left_extension_is_consistent():
    dist = two_point_family(0.2)
    env = sample_window_Q(dist, 31, 16, 20)
    once = env.extended(lo=-200)
    twice = env.extended(lo=-60).extended(lo=-200)
    assert np.array_equal(once.omega, twice.omega)
    assert once.law == "Q" and once.left_depth == 16
    # conditioned stretch unchanged by the deep extension
    assert np.array_equal(once.omega[once.index(-16) :], env.omega)


def test_hand_built_window_cannot_extend():
    env = window_from_values([0.5, 0.6])
    with pytest.raises(WindowError):
        env.extended(hi=5)


# ---------------------------------------------------------------------------
# ladder decomposition
# ---------------------------------------------------------------------------


def test_ladder_all_descents():
    env = env_from_rhos([0.5, 0.9, 0.3, 0.7])
    lad = ladder_decompose(env, 0, 4)
    assert list(lad.nu) == [0, 1, 2, 3, 4]
    assert list(lad.M) == pytest.approx([0.5, 0.9, 0.3, 0.7], rel=1e-15)


def test_ladder_worked_examples():
    lad = ladder_decompose(env_from_rhos([2.0, 0.5, 0.25, 0.5, 0.5]), 0, 2)
    assert list(lad.nu[:2]) == [0, 3]
    assert lad.M[0] == pytest.approx(2.0, rel=1e-15)
    lad2 = ladder_decompose(env_from_rhos([0.5, 2.0, 0.25, 0.5, 0.5]), 0, 3)
    assert list(lad2.nu[:3]) == [0, 1, 3]
    assert lad2.M[1] == pytest.approx(2.0, rel=1e-15)


def test_ladder_grows_window_on_demand():
    env = sample_window_P(two_point_family(0.2), 3, 0, 4)
    lad = ladder_decompose(env, 0, 200)
    assert lad.block_count == 200
    # purity: recompute on a window already covering the full range
    wide = sample_window_P(two_point_family(0.2), 3, 0, int(lad.nu[-1]) + 4)
    lad2 = ladder_decompose(wide, 0, 200)
    assert np.array_equal(lad.nu, lad2.nu)
    assert np.array_equal(lad.M, lad2.M)


def test_ladder_invariants_property():
    dist = two_point_family(0.25)
    for seed in range(1000):
        env = sample_window_P(dist, seed, 0, 64)
        lad = ladder_decompose(env, 0, 3)
        env = env.extended(hi=max(env.hi, int(lad.nu[-1])))
        assert np.all(np.diff(lad.nu) > 0)
        for i in range(1, lad.block_count + 1):
            left, right = lad.block_span(i)
            assert pi_product(env, left, right - 1) < 1.0
            prods = [pi_product(env, left, j) for j in range(left, right)]
            # interior partial products never dip below 1 before the block ends
            assert all(p >= 1.0 or j == right - 1 for j, p in zip(range(left, right), prods))
            assert lad.M[i - 1] == pytest.approx(max(prods), rel=1e-12)


def test_ladder_respects_bounded_window():
    env = window_from_values([1 / 3] * 6)  # rho = 2 everywhere: no descent
    with pytest.raises(WindowError):
        ladder_decompose(env, 0, 1)

"""Exact quenched statistics against independent oracles and closed forms."""

import csv
import math

import numpy as np
import pytest

from rwre import oracles
from rwre.environment import (
    homogeneous_family,
    ladder_decompose,
    sample_window_P,
    solomon_classify,
    two_point_family,
    w_sum,
    window_from_values,
)
from rwre.quenched import (
    InsufficientLadderError,
    annealed_mean_crossing,
    annealed_sq_crossing,
    block_moments,
    block_moments_range,
    centering_Z,
    clt_sigma2,
    hitting_prob,
    quenched_mean_T,
    quenched_mean_T_marks,
    quenched_var_T,
    reflected_mean_total,
    reflection_blocks,
    truncation_bound,
    write_block_csv,
)
from rwre.rng import derive, uniform_array
from rwre.walks import crossing_times_static_barrier, hitting_times_fixed_env


def random_window(seed: int, lo: int, hi: int, om_lo=0.1, om_hi=0.9):
    u = uniform_array(derive(seed, 0), np.arange(hi - lo + 1, dtype=np.uint64))
    return window_from_values(om_lo + (om_hi - om_lo) * u, lo=lo)


# ---------------------------------------------------------------------------
# hitting probabilities
# ---------------------------------------------------------------------------


def test_hitting_prob_symmetric_gamblers_ruin():
    env = window_from_values([0.5] * 5)
    up, down = hitting_prob(env, 0, 1, 4)
    assert up == pytest.approx(0.25, abs=1e-15)
    assert down == pytest.approx(0.75, abs=1e-15)


def test_hitting_prob_biased_geometric():
    env = window_from_values([2 / 3] * 4)
    up, _ = hitting_prob(env, 0, 1, 3)
    assert up == pytest.approx(4 / 7, abs=1e-14)


def test_hitting_prob_matches_linear_system():
    for seed in range(100):
        env = random_window(seed, 0, 11)
        for x in range(1, 11):
            up, down = hitting_prob(env, 0, x, 11)
            o_up, o_down = oracles.hitting_prob_linear_system(env, 0, x, 11)
            assert abs(up - o_up) <= 1e-12
            assert abs(down - o_down) <= 1e-12


def test_hitting_prob_pair_sums_to_one():
    for seed in range(50):
        env = random_window(seed, -3, 30)
        up, down = hitting_prob(env, -3, 4, 30)
        assert abs(up + down - 1.0) <= 1e-12


def test_hitting_prob_rejects_bad_ordering():
    env = window_from_values([0.5] * 5)
    with pytest.raises(ValueError):
        hitting_prob(env, 2, 1, 4)
    with pytest.raises(ValueError):
        hitting_prob(env, 2, 2, 2)


# ---------------------------------------------------------------------------
# quenched mean and variance
# ---------------------------------------------------------------------------


def test_mean_homogeneous_closed_form():
    env = window_from_values([0.75] * 300, lo=-256)
    assert quenched_mean_T(env, 1, 256) == pytest.approx(2.0, abs=1e-12)
    assert quenched_mean_T(env, 40, 256) == pytest.approx(80.0, abs=1e-10)


def test_mean_deterministic_walk():
    env = window_from_values([1.0] * 20, lo=-5)
    assert quenched_mean_T(env, 12, 4) == 12.0
    assert quenched_var_T(env, 12, 4) == 0.0


def test_var_homogeneous_closed_form():
    env = window_from_values([0.75] * 300, lo=-256)
    assert quenched_var_T(env, 1, 256) == pytest.approx(6.0, abs=1e-12)


def test_mean_additive_across_crossings():
    env = random_window(3, -16, 60)
    total = quenched_mean_T(env, 50, 16)
    by_sites = math.fsum(1.0 + 2.0 * w_sum(env, j, j + 16) for j in range(50))
    assert total == pytest.approx(by_sites, rel=1e-13)
    m = 20
    assert total == pytest.approx(
        quenched_mean_T(env, m, 16)
        + math.fsum(1.0 + 2.0 * w_sum(env, j, j + 16) for j in range(m, 50)),
        rel=1e-13,
    )


def test_var_matches_series_oracle():
    for seed in range(100):
        env = random_window(seed, -10, 35, om_lo=0.2, om_hi=0.8)
        v = quenched_var_T(env, 30, 10)
        o = oracles.var_T_series(env, 30, 10)
        assert abs(v - o) <= 1e-9 * o
        m = quenched_mean_T(env, 30, 10)
        om = oracles.mean_T_series(env, 30, 10)
        assert abs(m - om) <= 1e-12 * om


def test_var_is_sum_of_independent_crossing_variances():
    env = random_window(8, -12, 40, om_lo=0.25, om_hi=0.85)
    depth = 12
    total = quenched_var_T(env, 30, depth)
    parts = []
    for j in range(30):
        # shift crossing j to the origin; barrier keeps its absolute position
        om = env.omega[env.index(-depth) : env.index(j) + 1]
        shifted = window_from_values(om, lo=-depth - j)
        parts.append(quenched_var_T(shifted, 1, depth + j))
    assert total == pytest.approx(math.fsum(parts), rel=1e-12)


def test_mean_matches_monte_carlo():
    env = sample_window_P(two_point_family(1 / 17), 21, -64, 80)
    exact = quenched_mean_T(env, 50, 64)
    T, cens = hitting_times_fixed_env(env, 50, int(exact * 12), derive(5, 0), 100_000)
    assert not cens.any()
    se = float(np.std(T, ddof=1)) / math.sqrt(len(T))
    assert abs(float(np.mean(T)) - exact) < 4.0 * se + truncation_bound(env, 50, 64)


def test_marks_match_individual_means():
    env = random_window(4, -8, 64)
    marks = [3, 10, 31, 60]
    vals = quenched_mean_T_marks(env, marks, 8)
    for m, v in zip(marks, vals):
        assert v == pytest.approx(quenched_mean_T(env, m, 8), rel=1e-13)
    with pytest.raises(ValueError):
        quenched_mean_T_marks(env, [5, 5], 8)
    with pytest.raises(ValueError):
        quenched_mean_T_marks(env, [0, 3], 8)


def test_truncation_bound_controls_depth_error():
    env = sample_window_P(two_point_family(1 / 5), 51, -64, 40)
    shallow = quenched_mean_T(env, 30, 8)
    deep = quenched_mean_T(env, 30, 48)
    bound = truncation_bound(env, 30, 8)
    assert 0.0 <= deep - shallow <= bound


# ---------------------------------------------------------------------------
# block moments
# ---------------------------------------------------------------------------


def test_reflection_depth_examples():
    assert reflection_blocks(10) == 5
    assert reflection_blocks(100) == 21
    assert reflection_blocks(10**4) == 84
    assert reflection_blocks(1) == 1


def test_block_moments_invariants_and_monotonicity():
    env = sample_window_P(two_point_family(1 / 5), 13, -8, 512)
    ladder = ladder_decompose(env, 0, 40)
    env = env.extended(hi=max(env.hi, int(ladder.nu[-1])))
    for i in range(25, 31):
        small = block_moments(env, ladder, i, 10)  # b = 5
        large = block_moments(env, ladder, i, 100)  # b = 21
        assert small.mu >= small.M - 1e-12
        assert small.sigma2 >= small.M**2 - 1e-9
        assert large.mu >= small.mu - 1e-12
        assert large.sigma2 >= small.sigma2 - 1e-9


def test_block_moments_need_ladder_context():
    env = sample_window_P(two_point_family(1 / 5), 13, -8, 512)
    ladder = ladder_decompose(env, 0, 10)
    with pytest.raises(InsufficientLadderError):
        block_moments(env, ladder, 3, 10)


def test_block_moments_match_monte_carlo():
    env = sample_window_P(two_point_family(1 / 5), 2, -8, 512)
    ladder = ladder_decompose(env, 0, 40)
    env = env.extended(hi=max(env.hi, int(ladder.nu[-1])))
    bm = min(block_moments_range(env, ladder, 25, 32, 10), key=lambda b: b.mu)
    barrier = int(ladder.nu[bm.index - 1 - reflection_blocks(10)])
    T, cens = crossing_times_static_barrier(
        env, bm.nu_left, bm.nu_right, barrier, int(60 * bm.mu) + 200, derive(77, 0), 100_000
    )
    assert not cens.any()
    T = T.astype(float)
    se_mean = float(np.std(T, ddof=1)) / math.sqrt(len(T))
    assert abs(float(np.mean(T)) - bm.mu) < 4.0 * se_mean
    dev2 = (T - T.mean()) ** 2
    se_var = float(np.std(dev2, ddof=1)) / math.sqrt(len(T))
    assert abs(float(np.var(T, ddof=1)) - bm.sigma2) < 4.0 * se_var


def test_reflected_total_equals_sum_of_mu():
    env = sample_window_P(two_point_family(1 / 5), 5, -8, 1024)
    ladder = ladder_decompose(env, 0, 60)
    env = env.extended(hi=max(env.hi, int(ladder.nu[-1])))
    # total walks nu_22 -> nu_60, i.e. block crossings 23 .. 60
    moments = block_moments_range(env, ladder, 23, 60, 10)
    total = reflected_mean_total(env, ladder, 22, 60, 10)
    assert total == pytest.approx(math.fsum(m.mu for m in moments), rel=1e-12)


def test_block_csv_round_trip(tmp_path):
    env = sample_window_P(two_point_family(1 / 5), 5, -8, 512)
    ladder = ladder_decompose(env, 0, 30)
    env = env.extended(hi=max(env.hi, int(ladder.nu[-1])))
    moments = block_moments_range(env, ladder, 22, 28, 10)
    path = tmp_path / "blocks.csv"
    write_block_csv(str(path), moments, header_comment="seed=5 n=10")
    lines = path.read_text().splitlines()
    assert lines[0] == "# seed=5 n=10"
    rows = list(csv.DictReader(lines[1:]))
    assert len(rows) == len(moments)
    for row, bm in zip(rows, moments):
        assert int(row["blockIndex"]) == bm.index
        assert float(row["mu"]) == bm.mu  # repr round-trips exactly
        assert float(row["sigma2"]) == bm.sigma2
        assert int(row["reflectionDepth"]) == reflection_blocks(10)


# ---------------------------------------------------------------------------
# centering and annealed moments
# ---------------------------------------------------------------------------


def test_centering_zero_for_homogeneous():
    env = window_from_values([0.75] * 600, lo=-64)
    series = centering_Z(env, 1000, 0.5, [0.0, 0.25, 0.5, 1.0])
    assert series.values[0] == 0.0
    assert np.all(np.abs(series.values) < 1e-9)


def test_centering_lln_scaling():
    dist = two_point_family(1 / 9)
    vP = solomon_classify(dist).speed
    assert vP == pytest.approx(0.2, abs=1e-15)
    n = 100_000
    env = sample_window_P(dist, 17, -64, int(n * vP) + 1)
    series = centering_Z(env, n, vP, [1.0])
    assert abs(float(series.values[0])) / n < 0.02


def test_centering_rejects_bad_speed():
    env = window_from_values([0.75] * 10, lo=-2)
    with pytest.raises(ValueError):
        centering_Z(env, 10, 0.0, [0.5])


def test_annealed_crossing_mean_is_inverse_speed():
    for alpha in (1 / 5, 1 / 9, 1 / 17):
        dist = two_point_family(alpha)
        speed = solomon_classify(dist).speed
        assert annealed_mean_crossing(dist) == pytest.approx(1.0 / speed, rel=1e-13)
    assert annealed_mean_crossing(two_point_family(1 / 3)) == math.inf


def test_clt_sigma2_homogeneous_matches_classical_variance():
    for p in (0.6, 0.75, 0.9):
        r = (1.0 - p) / p
        classical = 4.0 * r * (1.0 + r) / (1.0 - r) ** 3
        assert clt_sigma2(homogeneous_family(p)) == pytest.approx(classical, rel=1e-12)


def test_annealed_sq_crossing_infinite_at_s_two():
    # s = 2 means E rho^2 = 1: the annealed second moment diverges
    assert annealed_sq_crossing(two_point_family(1 / 5)) == math.inf
    assert annealed_sq_crossing(two_point_family(1 / 17)) < math.inf

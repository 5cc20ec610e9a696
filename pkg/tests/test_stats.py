"""Distribution distances, Hill estimation, empirical Laplace transforms,
and the block-event detectors on worked and synthetic inputs."""

import math

import numpy as np
import pytest
from scipy.stats import norm

from rwre.quenched import BlockMoments
from rwre.rng import derive, uniform_array
from rwre.stats import (
    EmpiricalDistribution,
    EventReport,
    detect_dominant_block,
    detect_uniform_blocks,
    empirical_laplace,
    hill_estimator,
    ks_distance,
)


def uniforms(seed: int, n: int) -> np.ndarray:
    return uniform_array(derive(seed, 0), np.arange(n, dtype=np.uint64))


def mk_moments(Ms, mus, sig2s):
    return [
        BlockMoments(
            index=i + 1,
            nu_left=i,
            nu_right=i + 1,
            M=float(M),
            mu=float(mu),
            sigma2=float(s2),
            reflection_depth=5,
            scale_n=10,
        )
        for i, (M, mu, s2) in enumerate(zip(Ms, mus, sig2s))
    ]


def test_empirical_distribution_sorts_and_validates():
    dist = EmpiricalDistribution.from_samples([3.0, 1.0, 2.0])
    assert dist.values.tolist() == [1.0, 2.0, 3.0]
    assert dist.count == 3
    with pytest.raises(ValueError):
        EmpiricalDistribution(values=np.array([1.0, 2.0]), count=3)
    with pytest.raises(ValueError):
        EmpiricalDistribution.from_samples([])
    with pytest.raises(ValueError):
        dist.values[0] = 5.0


def test_ks_point_mass():
    dist = EmpiricalDistribution.from_samples([0.0])
    assert ks_distance(dist, norm.cdf) == pytest.approx(0.5)


def test_ks_exact_quantile_grid():
    n = 100
    grid = norm.ppf((np.arange(1, n + 1) - 0.5) / n)
    dist = EmpiricalDistribution.from_samples(grid)
    assert ks_distance(dist, norm.cdf) == pytest.approx(0.5 / n, abs=1e-12)


def test_ks_normal_sample():
    sample = norm.ppf(uniforms(1, 10_000))
    dist = EmpiricalDistribution.from_samples(sample)
    assert ks_distance(dist, norm.cdf) < 0.025


def test_ks_capped_at_one():
    dist = EmpiricalDistribution.from_samples([5.0])
    assert ks_distance(dist, lambda x: 1.0) == 1.0


def test_hill_pareto_tail():
    x = uniforms(2, 10_000) ** -0.5
    est = hill_estimator(EmpiricalDistribution.from_samples(x), 1000)
    assert not est.degenerate
    assert est.k == 1000
    assert est.estimate == pytest.approx(2.0, rel=0.10)


def test_hill_worked_value():
    dist = EmpiricalDistribution.from_samples([1.0, 2.0, 4.0, 8.0])
    est = hill_estimator(dist, 3)
    assert est.estimate == pytest.approx(1.0 / (2.0 * math.log(2.0)))


def test_hill_degenerate_constant():
    dist = EmpiricalDistribution.from_samples([2.0, 2.0, 2.0, 2.0])
    est = hill_estimator(dist, 2)
    assert est.degenerate
    assert est.estimate == math.inf


def test_hill_validation():
    dist = EmpiricalDistribution.from_samples([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        hill_estimator(dist, 0)
    with pytest.raises(ValueError):
        hill_estimator(dist, 3)
    with pytest.raises(ValueError):
        hill_estimator(EmpiricalDistribution.from_samples([-1.0, 2.0, 3.0]), 1)


def test_empirical_laplace_point_mass():
    dist = EmpiricalDistribution.from_samples(np.ones(5))
    lam = np.array([0.0, 0.5, 1.0, 2.0])
    assert empirical_laplace(dist, lam) == pytest.approx(np.exp(-lam))


def test_empirical_laplace_exponential():
    x = -np.log(uniforms(3, 20_000))
    dist = EmpiricalDistribution.from_samples(x)
    lam = np.linspace(0.0, 5.0, 26)
    sup = float(np.max(np.abs(empirical_laplace(dist, lam) - 1.0 / (1.0 + lam))))
    assert sup < 0.02


def test_detect_dominant_worked():
    moments = mk_moments([1, 1, 10], [1, 1, 10], [1, 1, 100])
    rep = detect_dominant_block(moments, 10.0, 1.0)
    assert rep.found
    assert rep.witness_indices == (3,)
    assert rep.scalars["qualifiers"] == 1

    flat = mk_moments([1, 1, 1], [1, 1, 1], [1, 1, 1])
    rep = detect_dominant_block(flat, 2.0, 1.0)
    assert not rep.found
    assert rep.witness_indices == ()


def test_detect_dominant_eta_restricts_window():
    moments = mk_moments([1, 1, 10], [1, 1, 10], [1, 1, 100])
    rep = detect_dominant_block(moments, 10.0, 0.5)
    assert not rep.found


def test_detect_dominant_validation():
    moments = mk_moments([1], [1], [1])
    with pytest.raises(ValueError):
        detect_dominant_block(moments, 1.0, 0.5)
    with pytest.raises(ValueError):
        detect_dominant_block(moments, 2.0, 0.0)
    with pytest.raises(ValueError):
        detect_dominant_block(moments, 2.0, 1.2)


def test_detect_dominant_at_most_one_qualifier():
    # with sigma2 >= M^2 blockwise, two qualifiers would force C <= 1
    for trial in range(200):
        u = uniform_array(derive(90, trial), np.arange(50, dtype=np.uint64))
        M = u ** (-1.0 / 1.5)
        sig2 = M**2 * (1.0 + 3.0 * uniform_array(derive(91, trial), np.arange(50, dtype=np.uint64)))
        rep = detect_dominant_block(mk_moments(M, M, sig2), 1.5, 1.0)
        assert rep.scalars["qualifiers"] <= 1


def test_detect_uniform_worked():
    mu2 = [5.0, 6.0, 1.0, 2.0]
    moments = mk_moments([1] * 4, np.sqrt(mu2), [1] * 4)
    rep = detect_uniform_blocks(moments, 4, 2.0, 1.0, 1)
    assert rep.found
    assert rep.witness_indices == (1, 2)

    too_big = mk_moments([1] * 4, np.sqrt([9.0, 1.0, 1.0, 1.0]), [1] * 4)
    assert not detect_uniform_blocks(too_big, 4, 2.0, 1.0, 1).found

    only_one = mk_moments([1] * 4, np.sqrt([5.0, 1.0, 1.0, 1.0]), [1] * 4)
    assert not detect_uniform_blocks(only_one, 4, 2.0, 1.0, 1).found


def test_detect_uniform_scale_invariance():
    # at s = 2 the band is [n, 2n): scaling mu^2 with n preserves the event
    mu2 = [20.0, 24.0, 4.0, 8.0] + [1.0] * 12
    moments = mk_moments([1] * 16, np.sqrt(mu2), [1] * 16)
    rep = detect_uniform_blocks(moments, 16, 2.0, 1.0, 1)
    assert rep.found
    assert rep.witness_indices == (1, 2)


def test_detect_uniform_validation():
    moments = mk_moments([1] * 4, [1] * 4, [1] * 4)
    with pytest.raises(ValueError):
        detect_uniform_blocks(moments, 4, 2.0, 1.0, 2)
    with pytest.raises(ValueError):
        detect_uniform_blocks(moments, 8, 2.0, 1.0, 1)


def test_event_report_consistency():
    with pytest.raises(ValueError):
        EventReport(event_name="x", found=True, witness_indices=())
    with pytest.raises(ValueError):
        EventReport(event_name="x", found=False, witness_indices=(1,))

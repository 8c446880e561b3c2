import math

import numpy as np
import pytest
from scipy import special

from linbandit.environment import (
    BanditInstance,
    CustomPrior,
    FixedPointPrior,
    GaussianIsotropicPrior,
    GaussianNoise,
    MonteCarloEstimate,
    TrajectoryRecord,
    UniformNoise,
    checkpoint_grid,
    norm_band_bound,
    norm_band_probability,
    pull,
    sample_z,
    stream,
)
from linbandit.geometry import FiniteSet, GeometryError, UnitSphere


def chi_moment(r, k):
    # E ||Z||^k for Z ~ N(0, I/r): ||Z||^2 r ~ chi^2_r
    return (2.0 / r) ** (k / 2) * special.gamma((r + k) / 2) / special.gamma(r / 2)


def test_fixed_point_prior_is_verbatim():
    np.testing.assert_array_equal(sample_z(FixedPointPrior([1, 2]), stream(0, 0, "prior")), [1.0, 2.0])


def test_gaussian_prior_covariance():
    z = GaussianIsotropicPrior(3).sample_many(stream(0, 0, "prior"), 1_000_000)
    cov = np.cov(z.T)
    # entrywise stderr of a sample covariance of N(0, I/3): diag 2/9, off-diag 1/9 per draw
    se = np.where(np.eye(3, dtype=bool), math.sqrt(2 / 9), math.sqrt(1 / 9)) / math.sqrt(z.shape[0])
    assert np.all(np.abs(cov - np.eye(3) / 3) <= 3 * se)


@pytest.mark.parametrize("r", [2, 4, 8])
def test_gaussian_prior_norm_moments(r):
    z = GaussianIsotropicPrior(r).sample_many(stream(2, r, "prior"), 100_000)
    norms = np.linalg.norm(z, axis=1)
    mean = MonteCarloEstimate.from_samples(norms)
    assert mean.mean <= 1.0 + 3 * mean.stderr
    assert abs(mean.mean - chi_moment(r, 1)) <= 4 * mean.stderr
    inv = MonteCarloEstimate.from_samples(1 / norms)
    assert inv.mean <= math.sqrt(math.pi) + 3 * inv.stderr


def test_inverse_norm_moment_is_sqrt_pi_at_r2():
    assert chi_moment(2, -1) == pytest.approx(math.sqrt(math.pi))


def test_pull_zero_noise():
    inst = BanditInstance(UnitSphere(2), [1.0, 0.0], GaussianNoise(0.0))
    rng = stream(0, 0, "noise")
    assert pull(inst, [1.0, 0.0], rng) == 1.0
    assert pull(inst, [0.0, 1.0], rng) == 0.0


def test_pull_mean_within_clt_bound():
    inst = BanditInstance(UnitSphere(2), [1.0, 0.0], GaussianNoise(1.0))
    rng = stream(0, 1, "noise")
    x = np.array([pull(inst, [1.0, 0.0], rng) for _ in range(100_000)])
    assert abs(x.mean() - 1.0) <= 3 / math.sqrt(1e5)


def test_pull_rejects_non_member():
    inst = BanditInstance(FiniteSet(np.eye(2)), [1.0, 0.0], GaussianNoise(1.0))
    with pytest.raises(GeometryError):
        pull(inst, [0.5, 0.5], stream(0, 0, "noise"))


def test_instance_dimension_check():
    with pytest.raises(ValueError):
        BanditInstance(UnitSphere(3), [1.0, 0.0], GaussianNoise(1.0))


@pytest.mark.parametrize("noise", [GaussianNoise(2.0), UniformNoise(0.5)])
def test_noise_is_centered(noise):
    w = noise.sample(stream(5, 0, "noise"), 1_000_000)
    assert abs(w.mean()) <= 5 * w.std() / math.sqrt(w.size)


def test_noise_parameters():
    assert GaussianNoise(2.0).sigma0 == 2.0
    u = UniformNoise(0.5)
    assert u.sigma0 == 0.5
    w = u.sample(stream(0, 0, "noise"), 10_000)
    assert np.all(np.abs(w) <= 0.5)
    with pytest.raises(ValueError):
        UniformNoise(0.0)
    with pytest.raises(ValueError):
        GaussianNoise(-1.0)


def test_custom_prior():
    p = CustomPrior(3, "iid_uniform", {"low": 0.0, "high": 2.0})
    z = p.sample(stream(0, 0, "prior"))
    assert z.shape == (3,) and np.all((0 <= z) & (z <= 2))
    with pytest.raises(ValueError):
        CustomPrior(3, "no_such_sampler")


def test_streams_are_reproducible_and_distinct():
    a = stream(7, 3, "noise").standard_normal(5)
    np.testing.assert_array_equal(a, stream(7, 3, "noise").standard_normal(5))
    assert not np.array_equal(a, stream(7, 3, "prior").standard_normal(5))
    assert not np.array_equal(a, stream(7, 4, "noise").standard_normal(5))
    assert not np.array_equal(a, stream(8, 3, "noise").standard_normal(5))
    with pytest.raises(ValueError):
        stream(0, 0, "bogus")


def test_norm_band_matches_exact_probability_at_r2():
    # at r = 2, ||Z||^2 is exponential with mean 1
    theta, beta = 0.09, 3.0
    exact = math.exp(-theta**2) - math.exp(-beta**2)
    est = norm_band_probability(theta, beta, 2, 1_000_000, stream(3, 0, "aux"))
    assert abs(est.mean - exact) <= 4 * est.stderr
    assert norm_band_bound(theta, beta) == pytest.approx(1 - 4 * 0.0081 - 1 / 9)
    assert norm_band_bound(theta, beta) == pytest.approx(0.8565, abs=1e-4)
    assert est.mean >= norm_band_bound(theta, beta) - 3 * est.stderr


def test_norm_band_edge_cases():
    est = norm_band_probability(0.001, 1e3, 2, 100_000, stream(3, 1, "aux"))
    assert est.mean == pytest.approx(1.0, abs=1e-4)
    est = norm_band_probability(0.5, 1.01, 8, 100_000, stream(3, 2, "aux"))
    assert norm_band_bound(0.5, 1.01) <= 0
    assert est.mean >= norm_band_bound(0.5, 1.01)
    with pytest.raises(ValueError):
        norm_band_probability(0.6, 3.0, 2, 10, stream(0, 0, "aux"))
    with pytest.raises(ValueError):
        norm_band_probability(0.1, 0.5, 2, 10, stream(0, 0, "aux"))


def test_checkpoint_grid():
    assert checkpoint_grid(100) == [1, 2, 4, 8, 16, 32, 64, 100]
    assert checkpoint_grid(64) == [1, 2, 4, 8, 16, 32, 64]
    assert checkpoint_grid(1) == [1]


def test_trajectory_record_cumulative():
    inst = np.array([0.5, 0.0, 0.25, 1.0])
    rec = TrajectoryRecord(0, 0, np.zeros(2), np.zeros((4, 2)), np.zeros(4), inst, np.full(4, np.nan),
                           np.full(4, np.nan), None, [1, 3, 4])
    assert rec.horizon == 4
    np.testing.assert_allclose(rec.cumulative_regret, [0.5, 0.5, 0.75, 1.75])
    assert rec.cumulative_regret_at_checkpoints == [(1, 0.5), (3, 0.75), (4, 1.75)]


def test_monte_carlo_estimate():
    est = MonteCarloEstimate.from_samples([1.0, 2.0, 3.0])
    assert est.mean == 2.0 and est.n == 3
    assert est.stderr == pytest.approx(1.0 / math.sqrt(3))

import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linbandit.estimation import (
    DRIFT_CHECK_EVERY,
    EstimationError,
    GaussianPosterior,
    OlsState,
    UncertaintyParams,
    directional_risk_terms,
    ols_init,
    ols_update,
    orthogonal_directions,
    posterior_update,
    uncertainty_radius,
    weighted_norm_sq,
)

I2 = np.eye(2)


def test_ols_init_orthonormal_design():
    s = ols_init(I2, [1.0, 2.0])
    np.testing.assert_allclose(s.estimate, [1.0, 2.0])
    np.testing.assert_allclose(s.gram_inverse, I2)
    assert s.t == 2


def test_ols_init_exact_recovery():
    z = np.array([3.0, -1.0])
    np.testing.assert_allclose(ols_init(I2, I2 @ z).estimate, z)


def test_ols_init_normal_equations_by_hand():
    # Gram [[2,1],[1,1]], X'y = (1+3, 3) = (4, 3): 2a + b = 4, a + b = 3 -> (1, 2)
    s = ols_init([[1.0, 0.0], [1.0, 1.0]], [1.0, 3.0])
    np.testing.assert_allclose(s.estimate, [1.0, 2.0])
    np.testing.assert_allclose(s.gram_inverse, [[1.0, -1.0], [-1.0, 2.0]])


def test_ols_init_rejects_singular_and_bad_rewards():
    with pytest.raises(EstimationError, match="singular"):
        ols_init([[1.0, 1.0], [2.0, 2.0]], [0.0, 0.0])
    with pytest.raises(EstimationError):
        ols_init(I2, [np.nan, 0.0])
    with pytest.raises(EstimationError):
        ols_init(np.eye(3)[:2], [0.0, 0.0])


def test_ols_update_diagonal():
    s = ols_init(I2, [0.0, 0.0])
    before = s.log_det_gram
    ols_update(s, [1.0, 0.0], 5.0)
    np.testing.assert_allclose(s.gram_inverse, np.diag([0.5, 1.0]))
    assert s.log_det_gram - before == pytest.approx(math.log(2.0))
    assert s.t == 3


def test_ols_update_rejects_non_finite_reward():
    s = ols_init(I2, [0.0, 0.0])
    with pytest.raises(EstimationError):
        s.update([1.0, 0.0], np.inf)


def test_weighted_norm_examples():
    s = ols_init(I2, [0.0, 0.0])
    assert weighted_norm_sq(s, [1.0, 0.0]) == pytest.approx(1.0)
    s.update([1.0, 0.0], 0.0)
    assert weighted_norm_sq(s, [1.0, 0.0]) == pytest.approx(0.5)
    s = ols_init([[1.0, 0.0], [1.0, 1.0]], [0.0, 0.0])
    assert weighted_norm_sq(s, [0.0, 1.0]) == pytest.approx(2.0)


def test_weighted_norm_clamp():
    s = ols_init(I2, [0.0, 0.0])
    s.gram_inverse = np.array([[-1e-14, 0.0], [0.0, 1.0]])
    assert s.weighted_norm_sq([1.0, 0.0]) == 0.0
    s.gram_inverse = np.array([[-1e-6, 0.0], [0.0, 1.0]])
    with pytest.raises(EstimationError):
        s.weighted_norm_sq([1.0, 0.0])


def test_sherman_morrison_after_50_updates():
    rng = np.random.default_rng(0)
    arms = rng.standard_normal((50, 3))
    init = np.eye(3)
    s = ols_init(init, rng.standard_normal(3))
    for u in arms:
        s.update(u, rng.standard_normal())
    direct = np.linalg.inv(init.T @ init + arms.T @ arms)
    assert np.linalg.norm(s.gram_inverse - direct) / np.linalg.norm(direct) < 1e-8


def test_sherman_morrison_after_1000_updates_and_determinant():
    rng = np.random.default_rng(1)
    r = 5
    init = np.eye(r)
    arms = rng.standard_normal((1000, r)) * rng.uniform(0.1, 3.0, (1000, 1))
    s = ols_init(init, rng.standard_normal(r), debug=True)
    for u in arms:
        w = s.weighted_norm_sq(u)
        prev = s.log_det_gram
        s.update(u, rng.standard_normal())
        assert s.log_det_gram - prev == pytest.approx(math.log1p(w), abs=1e-12)
    gram = init + arms.T @ arms
    assert np.linalg.cond(gram) < 1e6
    direct = np.linalg.inv(gram)
    assert np.linalg.norm(s.gram_inverse - direct) / np.linalg.norm(direct) < 1e-8
    assert math.exp(s.log_det_gram) == pytest.approx(np.linalg.det(gram), rel=1e-6)


def test_debug_drift_check_fires():
    s = ols_init(I2, [0.0, 0.0], debug=True)
    s.gram_inverse = s.gram_inverse * 1.01
    with pytest.raises(EstimationError, match="drift"):
        for _ in range(DRIFT_CHECK_EVERY):
            s.update([1.0, 0.0], 0.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**31 - 1))
def test_zero_noise_recovery(r, seed):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(r)
    init = np.linalg.qr(rng.standard_normal((r, r)))[0]
    s = ols_init(init, init @ z)
    assert np.max(np.abs(s.estimate - z)) < 1e-9
    for u in rng.standard_normal((30, r)):
        s.update(u, u @ z)
        assert np.max(np.abs(s.estimate - z)) < 1e-9


def test_batched_state_matches_single():
    rng = np.random.default_rng(2)
    rewards = rng.standard_normal((4, 2))
    batch = ols_init(I2, rewards)
    singles = [ols_init(I2, x) for x in rewards]
    for _ in range(10):
        u = rng.standard_normal((4, 2))
        x = rng.standard_normal(4)
        batch.update(u, x)
        for k, s in enumerate(singles):
            s.update(u[k], x[k])
    for k, s in enumerate(singles):
        np.testing.assert_allclose(batch.estimate[k], s.estimate, rtol=1e-12)
        np.testing.assert_allclose(batch.gram_inverse[k], s.gram_inverse, rtol=1e-12)
    cands = np.eye(2)
    np.testing.assert_allclose(batch.weighted_norms_sq_many(cands)[1],
                               [singles[1].weighted_norm_sq(c) for c in cands])


def test_copy_is_independent():
    s = ols_init(I2, [1.0, 1.0])
    c = s.copy()
    c.update([1.0, 0.0], 3.0)
    assert s.t == 2 and c.t == 3
    np.testing.assert_allclose(s.gram_inverse, I2)


def test_uncertainty_constants():
    p = UncertaintyParams(sigma0=1.0, u_bar=1.0, lambda0=1.0)
    kappa0 = 2 * math.sqrt(1 + math.log(37))
    assert p.kappa0 == pytest.approx(kappa0, rel=1e-15)
    assert p.kappa0 == pytest.approx(4.29457, abs=1e-4)
    assert p.alpha == pytest.approx(4 * kappa0**2, rel=1e-15)
    assert p.alpha == pytest.approx(73.779, rel=1e-4)
    assert UncertaintyParams(2.0, 1.0, 1.0).alpha == pytest.approx(2 * p.alpha)
    assert UncertaintyParams(1.0, 1.0, 1.0, alpha_override=1.0).alpha == 1.0


def test_uncertainty_params_validation():
    with pytest.raises(ValueError):
        UncertaintyParams(sigma0=0.0, u_bar=1.0, lambda0=1.0)
    UncertaintyParams(sigma0=0.0, u_bar=1.0, lambda0=1.0, alpha_override=1.0)
    with pytest.raises(ValueError):
        UncertaintyParams(sigma0=1.0, u_bar=1.0, lambda0=0.0)


def test_uncertainty_radius_plug_in():
    p = UncertaintyParams(1.0, 1.0, 1.0, arm_count=2)
    s = replace(ols_init(I2, [0.0, 0.0]), t=math.e)
    assert uncertainty_radius(s, p, [1.0, 0.0]) == pytest.approx(p.alpha * math.sqrt(2))
    assert uncertainty_radius(s, p, [2.0, 0.0]) == pytest.approx(2 * p.alpha * math.sqrt(2))


def test_uncertainty_radius_width_branches():
    t, r = 100, 2
    infinite = UncertaintyParams(1.0, 1.0, 1.0, alpha_override=1.0)
    assert infinite.scale(t, r) == pytest.approx(math.sqrt(math.log(t)) * math.sqrt(r * math.log(t)))
    few = UncertaintyParams(1.0, 1.0, 1.0, arm_count=3, alpha_override=1.0)
    assert few.scale(t, r) == pytest.approx(math.sqrt(math.log(t)) * math.sqrt(3))
    with pytest.raises(EstimationError):
        infinite.scale(1, r)


def test_posterior_single_update():
    post = posterior_update(GaussianPosterior.isotropic(2), [1.0, 0.0], 0.7, 1.0)
    np.testing.assert_allclose(post.covariance, np.diag([1 / 3, 1 / 2]), atol=1e-15)
    np.testing.assert_allclose(post.mean, [0.7 / 3, 0.0])


def test_posterior_zero_arm_is_uninformative():
    prior = GaussianPosterior.isotropic(3)
    post = posterior_update(prior, np.zeros(3), 5.0, 1.0)
    np.testing.assert_array_equal(post.mean, prior.mean)
    np.testing.assert_array_equal(post.covariance, prior.covariance)
    with pytest.raises(ValueError):
        posterior_update(prior, np.ones(3), 1.0, 0.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 8), st.integers(1, 60), st.integers(0, 2**31 - 1))
def test_posterior_matches_direct_formulas(r, steps, seed):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(r) / math.sqrt(r)
    arms = rng.standard_normal((steps, r))
    x = arms @ z + rng.standard_normal(steps)
    post = GaussianPosterior.isotropic(r)
    for u, xi in zip(arms, x):
        post = posterior_update(post, u, xi, 1.0)
    precision = r * np.eye(r) + arms.T @ arms
    np.testing.assert_allclose(post.covariance, np.linalg.inv(precision), atol=1e-10)
    np.testing.assert_allclose(post.mean, np.linalg.solve(precision, arms.T @ x), atol=1e-9)


def test_directional_terms_for_axis_exploration():
    arms = np.tile([1.0, 0.0], (10, 1))
    post = GaussianPosterior(np.array([2.0, 0.0]), np.eye(2) / 12)
    d = directional_risk_terms(arms, post)
    np.testing.assert_allclose(np.abs(d.basis), [[0.0, 1.0]], atol=1e-15)
    assert d.exploration[0] == pytest.approx(0.0, abs=1e-15)


def test_orthogonal_directions_degenerate_mean():
    np.testing.assert_array_equal(orthogonal_directions(np.zeros(3)), np.eye(3)[1:])


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 8), st.integers(1, 40), st.integers(0, 2**31 - 1))
def test_orthogonal_directions_orthonormal(r, steps, seed):
    rng = np.random.default_rng(seed)
    mean = rng.standard_normal(r)
    s = orthogonal_directions(mean)
    assert s.shape == (r - 1, r)
    np.testing.assert_allclose(s @ s.T, np.eye(r - 1), atol=1e-12)
    np.testing.assert_allclose(s @ mean, 0.0, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 8), st.integers(1, 40), st.integers(0, 2**31 - 1))
def test_directional_variance_lower_bound(r, steps, seed):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(r) / math.sqrt(r)
    arms = rng.standard_normal((steps, r))
    arms /= np.linalg.norm(arms, axis=1, keepdims=True)
    post = GaussianPosterior.isotropic(r)
    for u in arms:
        post = posterior_update(post, u, u @ z + rng.standard_normal(), 1.0)
    d = directional_risk_terms(arms, post, z)
    assert np.all(d.variance >= 1.0 / (r + d.exploration) - 1e-10)
    # oracle for the realized error and risk terms
    np.testing.assert_allclose(d.squared_error, (d.basis @ (z - post.mean)) ** 2)
    np.testing.assert_allclose(d.risk_terms, np.linalg.norm(z) * d.exploration
                               + steps * d.squared_error / np.linalg.norm(z))


def test_inverse_diagonal_dominates_reciprocal_diagonal():
    rng = np.random.default_rng(3)
    for _ in range(1000):
        b = rng.standard_normal((3, 3))
        a = b @ b.T
        m = 3 * np.eye(3) + a
        assert np.all(np.diag(np.linalg.inv(m)) >= 1.0 / np.diag(m) - 1e-12)


def test_ols_state_is_dataclass_with_dim():
    s = ols_init(np.eye(4), np.zeros(4))
    assert isinstance(s, OlsState) and s.dim == 4

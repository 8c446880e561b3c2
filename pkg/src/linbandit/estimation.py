"""Least-squares state, uncertainty radii and the conjugate Gaussian posterior.

``OlsState`` arrays may carry leading batch axes: ``gram_inverse`` has shape
``(..., r, r)`` and every vector quantity ``(..., r)``.  A single trajectory is
simply the case with no batch axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from numpy.typing import ArrayLike, NDArray

MAX_INIT_CONDITION = 1e12
NEGATIVE_FLOOR = -1e-12
DRIFT_CHECK_EVERY = 1 << 10
DRIFT_TOL = 1e-8


class EstimationError(ValueError):
    pass


def _clamp_quadratic(w: NDArray[np.float64]) -> NDArray[np.float64]:
    if np.any(w < NEGATIVE_FLOOR):
        raise EstimationError(f"weighted norm is negative beyond round-off: {np.min(w):g}")
    return np.maximum(w, 0.0)


@dataclass
class OlsState:
    """Inverse Gram ``C_t``, response sum ``sum U_s X_s`` and the OLS estimate."""

    t: int
    gram_inverse: NDArray[np.float64]
    response_acc: NDArray[np.float64]
    estimate: NDArray[np.float64]
    log_det_gram: NDArray[np.float64] | float
    gram: NDArray[np.float64]
    debug: bool = False

    @property
    def dim(self) -> int:
        return self.response_acc.shape[-1]

    def copy(self) -> "OlsState":
        return replace(
            self,
            gram_inverse=self.gram_inverse.copy(),
            response_acc=self.response_acc.copy(),
            estimate=self.estimate.copy(),
            log_det_gram=np.copy(self.log_det_gram),
            gram=self.gram.copy(),
        )

    def update(self, arm: ArrayLike, reward: ArrayLike) -> "OlsState":
        """Rank-one update in place; returns ``self``."""
        u = np.asarray(arm, dtype=float)
        x = np.asarray(reward, dtype=float)
        if not np.all(np.isfinite(x)):
            raise EstimationError("reward must be finite")
        c = self.gram_inverse
        cu = np.einsum("...ij,...j->...i", c, u)
        w = _clamp_quadratic(np.sum(u * cu, axis=-1))
        self.gram_inverse = c - cu[..., :, None] * cu[..., None, :] / (1.0 + w)[..., None, None]
        self.log_det_gram = self.log_det_gram + np.log1p(w)
        self.response_acc = self.response_acc + u * x[..., None]
        self.gram = self.gram + u[..., :, None] * u[..., None, :]
        self.estimate = np.einsum("...ij,...j->...i", self.gram_inverse, self.response_acc)
        self.t += 1
        if self.debug and self.t % DRIFT_CHECK_EVERY == 0:
            self.check_drift()
        return self

    def check_drift(self) -> float:
        direct = np.linalg.inv(self.gram)
        err = float(np.max(np.linalg.norm(self.gram_inverse - direct, axis=(-2, -1))
                           / np.linalg.norm(direct, axis=(-2, -1))))
        if err > DRIFT_TOL:
            raise EstimationError(f"inverse Gram drifted by {err:g} (relative Frobenius)")
        return err

    def weighted_norm_sq(self, u: ArrayLike) -> NDArray[np.float64] | float:
        """``u' C_t u``; ``u`` broadcasts against the batch axes."""
        u = np.asarray(u, dtype=float)
        w = _clamp_quadratic(np.sum(u * np.einsum("...ij,...j->...i", self.gram_inverse, u), axis=-1))
        return float(w) if np.ndim(w) == 0 else w

    def weighted_norms_sq_many(self, candidates: ArrayLike) -> NDArray[np.float64]:
        """``(..., m)`` weighted norms of ``m`` shared candidate arms."""
        v = np.asarray(candidates, dtype=float)
        return _clamp_quadratic(np.einsum("mi,...ij,mj->...m", v, self.gram_inverse, v))


def ols_init(arms: ArrayLike, rewards: ArrayLike, debug: bool = False) -> OlsState:
    """State after playing ``r`` linearly independent arms once each.

    ``arms`` is ``(r, r)`` (shared by every batch member) or ``(..., r, r)``;
    ``rewards`` is ``(..., r)``.
    """
    a = np.asarray(arms, dtype=float)
    x = np.asarray(rewards, dtype=float)
    r = a.shape[-1]
    if a.shape[-2] != r:
        raise EstimationError(f"need exactly r={r} initial arms, got {a.shape[-2]}")
    if not np.all(np.isfinite(x)):
        raise EstimationError("rewards must be finite")
    gram = np.swapaxes(a, -1, -2) @ a
    cond = np.linalg.cond(gram)
    if not np.all(np.isfinite(cond)) or np.any(cond > MAX_INIT_CONDITION):
        raise EstimationError(f"initial Gram matrix is singular (condition number {np.max(cond):.3g})")
    inv = np.linalg.inv(gram)
    response = np.einsum("...k,...ki->...i", x, a)
    batch = np.broadcast_shapes(gram.shape[:-2], x.shape[:-1])
    inv = np.broadcast_to(inv, batch + (r, r)).copy()
    gram = np.broadcast_to(gram, batch + (r, r)).copy()
    response = np.broadcast_to(response, batch + (r,)).copy()
    log_det = np.broadcast_to(np.linalg.slogdet(gram)[1], batch).copy()
    estimate = np.einsum("...ij,...j->...i", inv, response)
    return OlsState(r, inv, response, estimate, log_det if batch else float(log_det), gram, debug)


def ols_update(state: OlsState, arm: ArrayLike, reward: ArrayLike) -> OlsState:
    return state.update(arm, reward)


def weighted_norm_sq(state: OlsState, u: ArrayLike):
    return state.weighted_norm_sq(u)


@dataclass(frozen=True)
class UncertaintyParams:
    """Constants of the uncertainty ellipsoid.

    ``arm_count`` is the number of arms, or ``None`` for infinite sets.
    ``alpha_override`` replaces the theoretical ``alpha = 4 sigma0 kappa0^2``.
    """

    sigma0: float
    u_bar: float
    lambda0: float
    arm_count: int | None = None
    alpha_override: float | None = None

    def __post_init__(self):
        if self.u_bar <= 0 or self.lambda0 <= 0:
            raise ValueError("u_bar and lambda0 must be positive")
        if self.alpha_override is None and self.sigma0 <= 0:
            raise ValueError("sigma0 must be positive unless alpha is overridden")

    @property
    def kappa0(self) -> float:
        return 2.0 * math.sqrt(1.0 + math.log(1.0 + 36.0 * self.u_bar**2 / self.lambda0))

    @property
    def alpha(self) -> float:
        if self.alpha_override is not None:
            return float(self.alpha_override)
        return 4.0 * self.sigma0 * self.kappa0**2

    def scale(self, t: int, r: int) -> float:
        """``alpha sqrt(log t) sqrt(min(r log t, |U|))``, the radius per unit weighted norm."""
        if t < 2:
            raise EstimationError(f"uncertainty radius needs t >= 2, got {t}")
        log_t = math.log(t)
        width = r * log_t if self.arm_count is None else min(r * log_t, self.arm_count)
        return self.alpha * math.sqrt(log_t) * math.sqrt(width)


def uncertainty_radius(state: OlsState, params: UncertaintyParams, u: ArrayLike):
    return params.scale(state.t, state.dim) * np.sqrt(state.weighted_norm_sq(u))


# -- Bayesian side ------------------------------------------------------------


@dataclass(frozen=True)
class GaussianPosterior:
    mean: NDArray[np.float64]
    covariance: NDArray[np.float64]

    @classmethod
    def isotropic(cls, dim: int) -> "GaussianPosterior":
        """The ``N(0, I/r)`` prior."""
        return cls(np.zeros(dim), np.eye(dim) / dim)


def posterior_update(
    post: GaussianPosterior, arm: ArrayLike, reward: float, noise_var: float
) -> GaussianPosterior:
    """Conjugate update after observing ``reward = arm'Z + N(0, noise_var)``."""
    if noise_var <= 0:
        raise ValueError("noise_var must be positive")
    u = np.asarray(arm, dtype=float)
    su = post.covariance @ u
    gain = su / (u @ su + noise_var)
    mean = post.mean + gain * (reward - u @ post.mean)
    cov = post.covariance - np.outer(gain, su)
    return GaussianPosterior(mean, 0.5 * (cov + cov.T))


@dataclass(frozen=True)
class DirectionalRisk:
    """Exploration and posterior variance along directions orthogonal to the posterior mean.

    ``basis`` rows are the ``r - 1`` orthonormal directions.  When the true
    vector is supplied, ``squared_error`` holds the realized squared error along
    each direction and ``risk_terms`` the per-direction quantity
    ``||z|| Xi_k + T Gamma_k / ||z||``.
    """

    basis: NDArray[np.float64]
    exploration: NDArray[np.float64]
    variance: NDArray[np.float64]
    squared_error: NDArray[np.float64] | None = None
    risk_terms: NDArray[np.float64] | None = None


def orthogonal_directions(mean: ArrayLike) -> NDArray[np.float64]:
    """``r - 1`` orthonormal rows spanning the complement of ``mean``."""
    mean = np.asarray(mean, dtype=float)
    r = mean.size
    norm = np.linalg.norm(mean)
    if norm < 1e-12:
        return np.eye(r)[1:]
    q, _ = np.linalg.qr(np.column_stack([mean / norm, np.eye(r)]))
    return q[:, 1:r].T


def directional_risk_terms(
    arms: ArrayLike, posterior: GaussianPosterior, z: ArrayLike | None = None
) -> DirectionalRisk:
    u = np.atleast_2d(np.asarray(arms, dtype=float))
    s = orthogonal_directions(posterior.mean)
    exploration = np.sum((u @ s.T) ** 2, axis=0)
    variance = np.einsum("ki,ij,kj->k", s, posterior.covariance, s)
    if z is None:
        return DirectionalRisk(s, exploration, variance)
    z = np.asarray(z, dtype=float)
    sq_err = ((z - posterior.mean) @ s.T) ** 2
    zn = np.linalg.norm(z)
    terms = zn * exploration + u.shape[0] * sq_err / zn
    return DirectionalRisk(s, exploration, variance, sq_err, terms)

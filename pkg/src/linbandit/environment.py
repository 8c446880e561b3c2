"""Hidden parameters, noisy rewards and per-trajectory bookkeeping.

Randomness is organized in independent Philox streams keyed by
``(experiment_id, replication, role)``: the prior stream draws the hidden
vector, the noise stream draws one error per period.  Two policies run with the
same experiment id therefore face the same hidden vector and the same error
sequence, step for step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .geometry import ArmSet, GeometryError

STREAM_ROLES = {"prior": 0, "noise": 1, "aux": 2}


def stream(experiment_id: int, replication: int, role: str) -> np.random.Generator:
    """Counter-based generator for one (experiment, replication, role) triple."""
    if role not in STREAM_ROLES:
        raise ValueError(f"unknown stream role {role!r}")
    seq = np.random.SeedSequence([int(experiment_id), int(replication), STREAM_ROLES[role]])
    return np.random.Generator(np.random.Philox(seq))


# -- noise --------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianNoise:
    sigma: float = 1.0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")

    @property
    def sigma0(self) -> float:
        return self.sigma

    def sample(self, rng: np.random.Generator, size=None):
        return self.sigma * rng.standard_normal(size)


@dataclass(frozen=True)
class UniformNoise:
    """Errors uniform on ``[-half_width, half_width]``; bounded, hence ``half_width``-sub-Gaussian."""

    half_width: float = 1.0

    def __post_init__(self):
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")

    @property
    def sigma0(self) -> float:
        return self.half_width

    def sample(self, rng: np.random.Generator, size=None):
        return rng.uniform(-self.half_width, self.half_width, size)


NoiseModel = GaussianNoise | UniformNoise


# -- priors -------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianIsotropicPrior:
    """``Z ~ N(0, I_r / r)``."""

    dim: int

    def sample(self, rng: np.random.Generator) -> NDArray[np.float64]:
        return rng.standard_normal(self.dim) / math.sqrt(self.dim)

    def sample_many(self, rng: np.random.Generator, n: int) -> NDArray[np.float64]:
        return rng.standard_normal((n, self.dim)) / math.sqrt(self.dim)


@dataclass(frozen=True)
class FixedPointPrior:
    z: tuple[float, ...]

    def __init__(self, z: ArrayLike):
        object.__setattr__(self, "z", tuple(float(v) for v in np.ravel(z)))

    @property
    def dim(self) -> int:
        return len(self.z)

    def sample(self, rng: np.random.Generator) -> NDArray[np.float64]:
        return np.array(self.z)


def _iid_uniform(rng, dim, low=-1.0, high=1.0):
    return rng.uniform(low, high, dim)


def _gaussian_scaled(rng, dim, scale=1.0):
    return scale * rng.standard_normal(dim)


CUSTOM_SAMPLERS: dict[str, Callable[..., NDArray[np.float64]]] = {
    "iid_uniform": _iid_uniform,
    "gaussian_scaled": _gaussian_scaled,
}


@dataclass(frozen=True)
class CustomPrior:
    """A named sampler from ``CUSTOM_SAMPLERS`` plus keyword parameters."""

    dim: int
    tag: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.tag not in CUSTOM_SAMPLERS:
            raise ValueError(f"unknown prior sampler {self.tag!r}; known: {sorted(CUSTOM_SAMPLERS)}")

    def sample(self, rng: np.random.Generator) -> NDArray[np.float64]:
        return np.asarray(CUSTOM_SAMPLERS[self.tag](rng, self.dim, **self.params), dtype=float)


Prior = GaussianIsotropicPrior | FixedPointPrior | CustomPrior


def sample_z(prior: Prior, rng: np.random.Generator) -> NDArray[np.float64]:
    return prior.sample(rng)


# -- instance -----------------------------------------------------------------


@dataclass(frozen=True)
class BanditInstance:
    arm_set: ArmSet
    z: NDArray[np.float64]
    noise: NoiseModel

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        if z.shape != (self.arm_set.dim,):
            raise ValueError(f"z has shape {z.shape}, arm set has dim {self.arm_set.dim}")
        object.__setattr__(self, "z", z)


def pull(instance: BanditInstance, arm: ArrayLike, rng: np.random.Generator) -> float:
    """One reward ``arm'z + W``."""
    arm = np.asarray(arm, dtype=float)
    if not instance.arm_set.contains(arm):
        raise GeometryError(f"arm {arm} is not a member of {instance.arm_set!r}")
    return float(arm @ instance.z + instance.noise.sample(rng))


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    stderr: float
    n: int

    @classmethod
    def from_samples(cls, x: ArrayLike) -> "MonteCarloEstimate":
        x = np.asarray(x, dtype=float)
        se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else math.nan
        return cls(float(x.mean()), se, int(x.size))


def norm_band_bound(theta: float, beta: float) -> float:
    return 1.0 - 4.0 * theta**2 - 1.0 / beta**2


def norm_band_probability(
    theta: float, beta: float, r: int, n: int, rng: np.random.Generator
) -> MonteCarloEstimate:
    """Monte Carlo estimate of ``P(theta <= ||Z|| <= beta)`` for ``Z ~ N(0, I/r)``."""
    if not 0.0 < theta <= 0.5:
        raise ValueError(f"theta must lie in (0, 1/2], got {theta}")
    if beta <= 0.5:
        raise ValueError(f"beta must exceed 1/2, got {beta}")
    norms = np.linalg.norm(GaussianIsotropicPrior(r).sample_many(rng, n), axis=1)
    return MonteCarloEstimate.from_samples((norms >= theta) & (norms <= beta))


# -- trajectory record --------------------------------------------------------


def checkpoint_grid(horizon: int) -> list[int]:
    """Powers of two up to the horizon, plus the horizon itself."""
    grid = [1 << k for k in range(horizon.bit_length()) if (1 << k) <= horizon]
    if grid[-1] != horizon:
        grid.append(horizon)
    return grid


@dataclass
class TrajectoryRecord:
    """Step-level history of one run.

    ``weighted_norm_sq[t-1]`` is ``||U_t||^2`` in the inverse Gram of the first
    ``t-1`` arms and ``radius[t-1]`` the uncertainty radius used at step ``t``;
    both are NaN where undefined.
    """

    seed: int
    replication: int
    z: NDArray[np.float64]
    arms: NDArray[np.float64]
    rewards: NDArray[np.float64]
    instantaneous_regret: NDArray[np.float64]
    weighted_norm_sq: NDArray[np.float64]
    radius: NDArray[np.float64]
    arm_index: NDArray[np.intp] | None = None
    checkpoints: list[int] = field(default_factory=list)

    @property
    def horizon(self) -> int:
        return int(self.rewards.size)

    @property
    def cumulative_regret(self) -> NDArray[np.float64]:
        return np.cumsum(self.instantaneous_regret)

    @property
    def cumulative_regret_at_checkpoints(self) -> list[tuple[int, float]]:
        cum = self.cumulative_regret
        return [(t, float(cum[t - 1])) for t in self.checkpoints]

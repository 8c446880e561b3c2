"""Linearly parameterized bandits: arm geometries, policies and a Monte Carlo harness."""

from .environment import (
    BanditInstance,
    CustomPrior,
    FixedPointPrior,
    GaussianIsotropicPrior,
    GaussianNoise,
    TrajectoryRecord,
    UniformNoise,
    pull,
    stream,
)
from .estimation import (
    GaussianPosterior,
    OlsState,
    UncertaintyParams,
    directional_risk_terms,
    ols_init,
    ols_update,
    posterior_update,
    uncertainty_radius,
    weighted_norm_sq,
)
from .geometry import (
    Ellipsoid,
    FiniteSet,
    Polytope,
    UnitSphere,
    best_arm,
    extreme_points,
    gap,
    sbar_check,
    spanner,
)
from .policies import Greedy, Pege, Ucb1, UncertaintyEllipsoid, make_policy

__version__ = "0.1.0"

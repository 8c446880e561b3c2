"""Arm sets for linearly parameterized bandits.

Every arm set answers the same questions: which arm maximizes ``u'z``
(``best_arm``), how far an arm falls short of that maximum (``gap``), which
``r`` linearly independent arms can be used for exploration (``spanner``) and,
for strongly convex sets, the Lipschitz constant of the best-arm map.

All ``best_arm``/``max_reward`` methods broadcast over leading axes, so a
``(n, r)`` stack of parameter vectors yields a ``(n, r)`` stack of arms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

MEMBERSHIP_TOL = 1e-9
MAX_HYPERCUBE_DIM = 20


class GeometryError(ValueError):
    """Raised for invalid arm-set construction or queries."""


@dataclass(frozen=True)
class SpannerArms:
    """``r`` linearly independent member arms and the smallest eigenvalue of their Gram sum."""

    arms: NDArray[np.float64]
    lambda0: float

    @property
    def gram(self) -> NDArray[np.float64]:
        return self.arms.T @ self.arms


@dataclass(frozen=True)
class SbarCheck:
    passed: bool
    worst_ratio: float
    n_pairs: int


def _as_vector(z: ArrayLike, dim: int) -> NDArray[np.float64]:
    z = np.asarray(z, dtype=float)
    if z.shape[-1:] != (dim,):
        raise GeometryError(f"expected trailing dimension {dim}, got shape {z.shape}")
    return z


class ArmSet:
    """Base class; subclasses implement ``best_arm`` and ``contains``."""

    dim: int
    #: number of arms when the set is a finite list, ``None`` otherwise
    arm_count: int | None = None
    #: stored vectors for finite sets and polytopes (``None`` for continuous sets)
    candidates: NDArray[np.float64] | None = None

    def best_arm(self, z: ArrayLike) -> NDArray[np.float64]:
        raise NotImplementedError

    def contains(self, u: ArrayLike) -> bool:
        raise NotImplementedError

    @property
    def u_bar(self) -> float:
        raise NotImplementedError

    @property
    def sbar_constant(self) -> float | None:
        return None

    def spanner(self) -> SpannerArms:
        raise NotImplementedError

    def max_reward(self, z: ArrayLike) -> NDArray[np.float64] | float:
        z = _as_vector(z, self.dim)
        value = np.sum(self.best_arm(z) * z, axis=-1)
        return float(value) if value.ndim == 0 else value

    def gap(self, z: ArrayLike, u: ArrayLike) -> float:
        """Shortfall of arm ``u`` against the best arm for ``z``; ``u`` must be a member."""
        z = _as_vector(z, self.dim)
        u = _as_vector(u, self.dim)
        if not self.contains(u):
            raise GeometryError(f"arm {u} is not a member of {self!r}")
        return max(float(self.max_reward(z) - u @ z), 0.0)

    def batch_gap(self, z: NDArray[np.float64], u: NDArray[np.float64]) -> NDArray[np.float64]:
        """Vectorized gap without membership checks (used on policy output)."""
        return np.maximum(self.max_reward(z) - np.sum(u * z, axis=-1), 0.0)

    def boundary_map(self) -> NDArray[np.float64]:
        """Linear map taking the unit sphere onto the boundary of the set."""
        raise GeometryError(f"{type(self).__name__} is not the image of a sphere")

    def boundary_grid(self, n: int) -> NDArray[np.float64]:
        raise GeometryError(f"{type(self).__name__} has no angular boundary grid")


class UnitSphere(ArmSet):
    """``{u : ||u|| = 1}``."""

    def __init__(self, dim: int):
        if dim < 2:
            raise GeometryError("dimension must be at least 2")
        self.dim = int(dim)

    def __repr__(self) -> str:
        return f"UnitSphere(dim={self.dim})"

    def best_arm(self, z: ArrayLike) -> NDArray[np.float64]:
        z = _as_vector(z, self.dim)
        norm = np.linalg.norm(z, axis=-1, keepdims=True)
        zero = norm == 0.0
        out = z / np.where(zero, 1.0, norm)
        if np.any(zero):
            e1 = np.zeros(self.dim)
            e1[0] = 1.0
            out = np.where(zero, e1, out)
        return out

    def max_reward(self, z: ArrayLike) -> NDArray[np.float64] | float:
        value = np.linalg.norm(_as_vector(z, self.dim), axis=-1)
        return float(value) if value.ndim == 0 else value

    def contains(self, u: ArrayLike) -> bool:
        u = _as_vector(u, self.dim)
        return abs(float(u @ u) - 1.0) <= MEMBERSHIP_TOL

    @property
    def u_bar(self) -> float:
        return 1.0

    @property
    def sbar_constant(self) -> float:
        return 1.0

    def spanner(self) -> SpannerArms:
        return SpannerArms(np.eye(self.dim), 1.0)

    def boundary_map(self) -> NDArray[np.float64]:
        return np.eye(self.dim)

    def boundary_grid(self, n: int) -> NDArray[np.float64]:
        if self.dim != 2:
            raise GeometryError("angular grid is only defined for dim 2")
        theta = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        return np.column_stack([np.cos(theta), np.sin(theta)])


class Ellipsoid(ArmSet):
    """``{u : u' Q^{-1} u <= 1}`` for a symmetric positive definite ``Q``."""

    def __init__(self, shape: ArrayLike):
        q = np.array(shape, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1] or q.shape[0] < 2:
            raise GeometryError(f"shape matrix must be square with dim >= 2, got {q.shape}")
        if not np.allclose(q, q.T, atol=1e-12):
            raise GeometryError("shape matrix must be symmetric")
        eig = np.linalg.eigvalsh(q)
        if eig[0] <= 0.0:
            raise GeometryError(f"shape matrix must be positive definite (lambda_min={eig[0]:g})")
        self.dim = q.shape[0]
        self.shape = q
        self.shape.setflags(write=False)
        self._inverse = np.linalg.inv(q)
        self._eig = eig

    def __repr__(self) -> str:
        return f"Ellipsoid(shape={self.shape.tolist()})"

    def best_arm(self, z: ArrayLike) -> NDArray[np.float64]:
        z = _as_vector(z, self.dim)
        qz = z @ self.shape
        scale = np.sqrt(np.sum(qz * z, axis=-1, keepdims=True))
        zero = scale == 0.0
        out = qz / np.where(zero, 1.0, scale)
        if np.any(zero):
            tie = self.shape[:, 0] / np.sqrt(self.shape[0, 0])
            out = np.where(zero, tie, out)
        return out

    def contains(self, u: ArrayLike) -> bool:
        u = _as_vector(u, self.dim)
        return float(u @ self._inverse @ u) <= 1.0 + MEMBERSHIP_TOL

    @property
    def u_bar(self) -> float:
        return float(np.sqrt(self._eig[-1]))

    @property
    def sbar_constant(self) -> float:
        return float(self._eig[-1] / np.sqrt(self._eig[0]))

    def spanner(self) -> SpannerArms:
        # principal semi-axes; their Gram sum is Q itself
        eig, vec = np.linalg.eigh(self.shape)
        arms = (vec * np.sqrt(eig)).T
        return SpannerArms(arms, float(np.linalg.eigvalsh(arms.T @ arms)[0]))

    def boundary_map(self) -> NDArray[np.float64]:
        """``L`` with ``L L' = Q``: the boundary is the image of the unit sphere under ``L``."""
        return np.linalg.cholesky(self.shape)

    def boundary_grid(self, n: int) -> NDArray[np.float64]:
        if self.dim != 2:
            raise GeometryError("angular grid is only defined for dim 2")
        theta = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        return np.column_stack([np.cos(theta), np.sin(theta)]) @ self.boundary_map().T


class FiniteSet(ArmSet):
    """An explicit list of arms; ties in the argmax go to the lowest index."""

    def __init__(self, arms: ArrayLike):
        a = np.array(arms, dtype=float)
        if a.ndim != 2 or a.shape[0] < 1:
            raise GeometryError("a finite arm set needs at least one vector")
        if a.shape[1] < 2:
            raise GeometryError("dimension must be at least 2")
        self.dim = a.shape[1]
        self.candidates = a
        self.candidates.setflags(write=False)
        self.arm_count = a.shape[0]

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.candidates.shape[0]}, dim={self.dim})"

    def best_index(self, z: ArrayLike) -> NDArray[np.intp]:
        z = _as_vector(z, self.dim)
        return np.argmax(z @ self.candidates.T, axis=-1)

    def best_arm(self, z: ArrayLike) -> NDArray[np.float64]:
        return self.candidates[self.best_index(z)]

    def index_of(self, u: ArrayLike) -> int:
        u = _as_vector(u, self.dim)
        hit = np.flatnonzero(np.max(np.abs(self.candidates - u), axis=1) <= MEMBERSHIP_TOL)
        if hit.size == 0:
            raise GeometryError(f"arm {u} is not in the set")
        return int(hit[0])

    def contains(self, u: ArrayLike) -> bool:
        try:
            self.index_of(u)
        except GeometryError:
            return False
        return True

    @property
    def u_bar(self) -> float:
        return float(np.max(np.linalg.norm(self.candidates, axis=1)))

    def spanner(self) -> SpannerArms:
        return _greedy_spanner(self.candidates)


class Polytope(FiniteSet):
    """Convex hull of a list of extreme points.

    The vertex list is canonical; ``simplex`` and ``hypercube`` are the only
    constructors that also know a constraint form (used for membership).
    Because the set is a solid, ``arm_count`` is ``None``.
    """

    def __init__(self, vertices: ArrayLike, kind: str = "vertices"):
        super().__init__(vertices)
        self.arm_count = None
        self.kind = kind

    def __repr__(self) -> str:
        return f"Polytope(kind={self.kind!r}, vertices={self.candidates.shape[0]}, dim={self.dim})"

    @classmethod
    def simplex(cls, dim: int) -> "Polytope":
        """``{u : sum |u_i| <= 1}`` with vertices ``+e1, -e1, +e2, ...``."""
        eye = np.eye(dim)
        return cls(np.stack([s * e for e in eye for s in (1.0, -1.0)]), kind="simplex")

    @classmethod
    def hypercube(cls, dim: int) -> "Polytope":
        """``{u : |u_i| <= 1}`` with its ``2**dim`` sign vectors."""
        if dim > MAX_HYPERCUBE_DIM:
            raise GeometryError(
                f"hypercube(dim={dim}) would enumerate 2**{dim} extreme points; limit is {MAX_HYPERCUBE_DIM}"
            )
        return cls(np.array(list(itertools.product((1.0, -1.0), repeat=dim))), kind="hypercube")

    def contains(self, u: ArrayLike) -> bool:
        u = _as_vector(u, self.dim)
        if self.kind == "simplex":
            return float(np.sum(np.abs(u))) <= 1.0 + MEMBERSHIP_TOL
        if self.kind == "hypercube":
            return float(np.max(np.abs(u))) <= 1.0 + MEMBERSHIP_TOL
        return _in_convex_hull(self.candidates, u)

    def spanner(self) -> SpannerArms:
        if self.kind in ("simplex", "hypercube"):
            return SpannerArms(np.eye(self.dim), 1.0)
        return _greedy_spanner(self.candidates)


def _in_convex_hull(points: NDArray[np.float64], u: NDArray[np.float64]) -> bool:
    from scipy.optimize import linprog

    m = points.shape[0]
    a_eq = np.vstack([points.T, np.ones((1, m))])
    b_eq = np.append(u, 1.0)
    res = linprog(np.zeros(m), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    return res.status == 0 and np.allclose(points.T @ res.x, u, atol=MEMBERSHIP_TOL * 10)


def _greedy_spanner(vectors: NDArray[np.float64]) -> SpannerArms:
    """Pivoted Gram-Schmidt: repeatedly take the vector with the largest residual."""
    dim = vectors.shape[1]
    scale = max(float(np.max(np.linalg.norm(vectors, axis=1))), 1e-300)
    residual = vectors.copy()
    chosen: list[int] = []
    for _ in range(dim):
        norms = np.linalg.norm(residual, axis=1)
        norms[chosen] = -1.0
        k = int(np.argmax(norms))
        if norms[k] <= 1e-10 * scale:
            raise GeometryError(f"arms span a subspace of rank {len(chosen)} < {dim}")
        chosen.append(k)
        q = residual[k] / norms[k]
        residual -= np.outer(residual @ q, q)
    arms = vectors[sorted(chosen)]
    return SpannerArms(arms, float(np.linalg.eigvalsh(arms.T @ arms)[0]))


def best_arm(arm_set: ArmSet, z: ArrayLike) -> NDArray[np.float64]:
    return arm_set.best_arm(z)


def max_reward(arm_set: ArmSet, z: ArrayLike) -> float:
    return arm_set.max_reward(z)


def gap(arm_set: ArmSet, z: ArrayLike, u: ArrayLike) -> float:
    return arm_set.gap(z, u)


def spanner(arm_set: ArmSet) -> SpannerArms:
    return arm_set.spanner()


def extreme_points(polytope: Polytope) -> FiniteSet:
    if not isinstance(polytope, Polytope):
        raise GeometryError("extreme points are only defined for polytopes")
    return FiniteSet(polytope.candidates)


def sbar_check(arm_set: ArmSet, J: float, n_samples: int, seed: int = 0) -> SbarCheck:
    """Largest observed ``||u*(z) - u*(y)|| / ||z - y||`` over random unit pairs."""
    if arm_set.sbar_constant is None:
        raise GeometryError(f"SBAR undefined for {arm_set!r}")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n_samples, arm_set.dim))
    y = rng.standard_normal((n_samples, arm_set.dim))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    y /= np.linalg.norm(y, axis=1, keepdims=True)
    return sbar_ratio(arm_set, z, y, J)


def sbar_ratio(arm_set: ArmSet, z: ArrayLike, y: ArrayLike, J: float) -> SbarCheck:
    z = np.atleast_2d(np.asarray(z, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    denom = np.linalg.norm(z - y, axis=1)
    num = np.linalg.norm(arm_set.best_arm(z) - arm_set.best_arm(y), axis=1)
    same = denom == 0.0
    ratio = np.where(same, 0.0, num / np.where(same, 1.0, denom))
    worst = float(np.max(ratio)) if ratio.size else 0.0
    return SbarCheck(worst <= J * (1.0 + 1e-9), worst, int(z.shape[0]))


def normalize(w: ArrayLike) -> NDArray[np.float64]:
    """``w/||w||`` with ``0/||0||`` fixed to ``e1``."""
    w = np.asarray(w, dtype=float)
    return UnitSphere(w.shape[-1]).best_arm(w)

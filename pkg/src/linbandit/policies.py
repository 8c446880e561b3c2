"""Sequential decision policies.

Every policy drives ``n`` independent replications in lock step::

    policy.reset(arm_set, n)
    for t in range(1, horizon + 1):
        arms = policy.select(t)          # (n, r)
        policy.observe(arms, rewards)    # rewards: (n,)

Selections are deterministic functions of the observation history, so the
replications in a batch never influence one another and results do not depend
on how replications are grouped into batches.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.typing import NDArray

from .geometry import ArmSet, FiniteSet, Polytope, extreme_points
from .estimation import OlsState, UncertaintyParams, ols_init


ASCENT_TOL = 1e-10
GRID_STRIDE = 25
GRID_PEAKS = 3
NEWTON_STEPS = 6
TIE_TOL = 1e-12


class PolicyError(ValueError):
    pass


class Policy:
    name = "policy"
    #: spanner arms played in the first ``r`` periods, when the policy does so
    init_arms: NDArray[np.float64] | None = None
    #: index into ``arm_set.candidates`` of the last selection, for finite sets
    last_index: NDArray[np.intp] | None = None
    #: uncertainty radius of the last selection (UE only)
    last_radius: NDArray[np.float64] | None = None

    def reset(self, arm_set: ArmSet, n: int = 1) -> None:
        raise NotImplementedError

    def select(self, t: int) -> NDArray[np.float64]:
        raise NotImplementedError

    def observe(self, arms: NDArray[np.float64], rewards: NDArray[np.float64]) -> None:
        raise NotImplementedError

    def _index_of(self, arms: NDArray[np.float64]) -> NDArray[np.intp] | None:
        cands = self.arm_set.candidates
        if cands is None:
            return None
        return np.argmax(np.all(np.abs(arms[:, None, :] - cands[None]) <= 1e-12, axis=-1), axis=1)


class Pege(Policy):
    """Phased exploration and greedy exploitation.

    Cycle ``c`` plays the ``r`` spanner arms once each, re-estimates the
    parameter from exploration rewards only, then plays the greedy arm for
    ``c`` periods.  After ``K`` full cycles ``r K + K (K + 1) / 2`` periods
    have elapsed.
    """

    name = "pege"

    def reset(self, arm_set: ArmSet, n: int = 1) -> None:
        self.arm_set = arm_set
        self.n = n
        span = arm_set.spanner()
        self.init_arms = span.arms
        self._b = span.arms
        self._gram_inv = np.linalg.inv(span.arms.T @ span.arms)
        self.r = arm_set.dim
        self.cycle = 1
        self.position = 0
        self.reward_sums = np.zeros((n, self.r))
        self.estimate: NDArray[np.float64] | None = None
        self.estimate_cycle = 0
        self.greedy_arm: NDArray[np.float64] | None = None
        self._greedy_index = None

    @property
    def phase(self) -> tuple[str, int]:
        """``("explore", k)`` with ``k`` in ``1..r`` or ``("exploit", remaining)``."""
        if self.position < self.r:
            return "explore", self.position + 1
        return "exploit", self.r + self.cycle - self.position

    @staticmethod
    def periods_after(cycles: int, r: int) -> int:
        return r * cycles + cycles * (cycles + 1) // 2

    def select(self, t: int) -> NDArray[np.float64]:
        if self.position < self.r:
            arms = np.broadcast_to(self._b[self.position], (self.n, self.r))
            self.last_index = None
            return arms
        self.last_index = self._greedy_index
        return self.greedy_arm

    def observe(self, arms, rewards) -> None:
        if self.position < self.r:
            self.reward_sums[:, self.position] += rewards
            if self.position == self.r - 1:
                self.estimate = (self.reward_sums / self.cycle) @ self._b @ self._gram_inv
                self.estimate_cycle = self.cycle
                self.greedy_arm = self.arm_set.best_arm(self.estimate)
                self._greedy_index = self._index_of(self.greedy_arm)
        self.position += 1
        if self.position == self.r + self.cycle:
            self.cycle += 1
            self.position = 0


class _SpannerInitMixin(Policy):
    """Shared initialization: play the spanner arms, then keep an OLS state."""

    def _init_reset(self, arm_set: ArmSet, n: int) -> None:
        self.arm_set = arm_set
        self.n = n
        self.r = arm_set.dim
        self.spanner = arm_set.spanner()
        self.init_arms = self.spanner.arms
        self._init_rewards = np.zeros((n, self.r))
        self.ols: OlsState | None = None
        self._steps = 0

    def _init_observe(self, arms, rewards) -> None:
        self._steps += 1
        if self._steps <= self.r:
            self._init_rewards[:, self._steps - 1] = rewards
            if self._steps == self.r:
                self.ols = ols_init(self.init_arms, self._init_rewards)
        else:
            self.ols.update(arms, rewards)


class Greedy(_SpannerInitMixin):
    """Play the best arm for the current least-squares estimate."""

    name = "greedy"

    def reset(self, arm_set: ArmSet, n: int = 1) -> None:
        self._init_reset(arm_set, n)

    def select(self, t: int) -> NDArray[np.float64]:
        if self._steps < self.r:
            self.last_index = None
            return np.broadcast_to(self.init_arms[self._steps], (self.n, self.r))
        arms = self.arm_set.best_arm(self.ols.estimate)
        self.last_index = self._index_of(arms)
        return arms

    def observe(self, arms, rewards) -> None:
        self._init_observe(arms, rewards)


class UncertaintyEllipsoid(_SpannerInitMixin):
    """Optimistic policy: maximize ``v' Z_hat + R^v`` over the arm set.

    Sets with a stored vector list (finite sets, polytopes) are maximized
    exactly by enumeration; the objective is convex in ``v``, so a polytope's
    maximum sits at a vertex.  Continuous sets use multi-start fixed-point
    ascent ``v <- best_arm(Z_hat + s C v / ||v||_C)``, which never decreases
    the objective, refined by an angular grid in dimension 2.  In higher
    dimensions the continuous maximization is approximate.
    """

    name = "ue"

    def __init__(
        self,
        sigma0: float = 1.0,
        alpha: float | None = None,
        u_bar: float | None = None,
        lambda0: float | None = None,
        starts: int = 8,
        grid: int = 10_000,
        max_iter: int = 40,
    ):
        self.sigma0 = sigma0
        self.alpha_override = alpha
        self.u_bar = u_bar
        self.lambda0 = lambda0
        self.starts = starts
        self.grid = grid
        self.max_iter = max_iter

    def reset(self, arm_set: ArmSet, n: int = 1) -> None:
        self._init_reset(arm_set, n)
        self.params = UncertaintyParams(
            sigma0=self.sigma0,
            u_bar=self.u_bar if self.u_bar is not None else arm_set.u_bar,
            lambda0=self.lambda0 if self.lambda0 is not None else self.spanner.lambda0,
            arm_count=arm_set.arm_count,
            alpha_override=self.alpha_override,
        )
        self._grid_theta = None
        if arm_set.candidates is None and arm_set.dim == 2 and self.grid:
            self._map = arm_set.boundary_map()
            self._grid_theta = np.linspace(0.0, 2.0 * np.pi, self.grid, endpoint=False)
            th = self._grid_theta
            self._grid_trig = np.stack([np.cos(th), np.sin(th), np.cos(2 * th), np.sin(2 * th)])

    def indices(self, candidates: NDArray[np.float64]) -> NDArray[np.float64]:
        """Optimistic index of each candidate arm, shape ``(n, m)``."""
        scale = self.params.scale(self.ols.t, self.r)
        return self.ols.estimate @ candidates.T + scale * np.sqrt(self.ols.weighted_norms_sq_many(candidates))

    def objective(self, v: NDArray[np.float64]) -> NDArray[np.float64]:
        """Index of per-replication arms ``v`` of shape ``(n, ..., r)``."""
        scale = self.params.scale(self.ols.t, self.r)
        c = self.ols.gram_inverse
        cv = np.einsum("nij,n...j->n...i", c, v)
        zhat = self.ols.estimate.reshape((self.n,) + (1,) * (v.ndim - 2) + (self.r,))
        return np.sum(v * zhat, axis=-1) + scale * np.sqrt(np.maximum(np.sum(v * cv, axis=-1), 0.0))

    def select(self, t: int) -> NDArray[np.float64]:
        if self._steps < self.r:
            self.last_index = None
            self.last_radius = None
            return np.broadcast_to(self.init_arms[self._steps], (self.n, self.r))
        cands = self.arm_set.candidates
        if cands is not None:
            idx = np.argmax(self.indices(cands), axis=1)
            arms = cands[idx]
            self.last_index = idx
        else:
            arms = self._ascend()
            self.last_index = None
        self.last_radius = self.params.scale(self.ols.t, self.r) * np.sqrt(self.ols.weighted_norm_sq(arms))
        return arms

    def _start_points(self) -> NDArray[np.float64]:
        _, vec = np.linalg.eigh(self.ols.gram_inverse)
        dirs = [self.ols.estimate]
        for k in range(self.r - 1, -1, -1):  # largest eigenvalue first
            dirs.append(vec[:, :, k])
            dirs.append(-vec[:, :, k])
        return self.arm_set.best_arm(np.stack(dirs[: self.starts], axis=1))

    def _ascend_from(self, v: NDArray[np.float64]) -> NDArray[np.float64]:
        """Fixed-point ascent ``v <- best_arm(Z_hat + s C v / ||v||_C)``.

        Each step maximizes the linearized objective, so the objective never
        decreases.  A (replication, start) pair stops once it gains less than
        ``ASCENT_TOL`` relative.
        """
        scale = self.params.scale(self.ols.t, self.r)
        c = self.ols.gram_inverse
        zhat = self.ols.estimate
        v = np.array(v, dtype=float)
        value = self.objective(v)
        active = np.ones(v.shape[:2], dtype=bool)
        for _ in range(self.max_iter):
            rows, cols = np.nonzero(active)
            if rows.size == 0:
                break
            va = v[rows, cols]
            cv = np.einsum("mij,mj->mi", c[rows], va)
            norm = np.sqrt(np.maximum(np.sum(va * cv, axis=-1), 1e-300))
            new = self.arm_set.best_arm(zhat[rows] + scale * cv / norm[:, None])
            cn = np.einsum("mij,mj->mi", c[rows], new)
            new_value = np.sum(new * zhat[rows], axis=-1) + scale * np.sqrt(np.maximum(np.sum(new * cn, axis=-1), 0.0))
            gain = new_value - value[rows, cols]
            keep = gain > 0
            v[rows[keep], cols[keep]] = new[keep]
            value[rows[keep], cols[keep]] = new_value[keep]
            active[rows, cols] = gain > ASCENT_TOL * (1.0 + np.abs(new_value))
        return v

    def _ascend(self) -> NDArray[np.float64]:
        v = self._ascend_from(self._start_points())
        if self._grid_theta is not None:
            v = np.concatenate([v, self._angle_search()[:, None, :]], axis=1)
        value = self.objective(v)
        top = np.max(value, axis=1, keepdims=True)
        # numerically tied maxima (symmetric designs produce them) go to the lowest start
        best = np.argmax(value >= top - TIE_TOL * (1.0 + np.abs(top)), axis=1)
        return v[np.arange(self.n), best]

    def _angle_search(self) -> NDArray[np.float64]:
        """Dimension 2: maximize over the boundary angle.

        The boundary is ``L (cos a, sin a)``, so the objective reads
        ``p cos a + q sin a + s sqrt(h(a))`` with ``h`` a trigonometric quadratic.
        The angular grid is scored coarse to fine (every ``GRID_STRIDE``-th
        point, then full resolution around the ``GRID_PEAKS`` best coarse local
        maxima) and the winner is polished by safeguarded Newton steps.
        """
        scale = self.params.scale(self.ols.t, self.r)
        lmap = self._map
        pq = self.ols.estimate @ lmap
        m = lmap.T @ self.ols.gram_inverse @ lmap
        half_sum = 0.5 * (m[:, 0, 0] + m[:, 1, 1])
        half_diff = 0.5 * (m[:, 0, 0] - m[:, 1, 1])
        cross = m[:, 0, 1]

        def value(a):
            h = half_sum[:, None] + half_diff[:, None] * np.cos(2 * a) + cross[:, None] * np.sin(2 * a)
            return pq[:, :1] * np.cos(a) + pq[:, 1:] * np.sin(a) + scale * np.sqrt(np.maximum(h, 0.0))

        theta, trig = self._grid_theta, self._grid_trig
        size = theta.size
        stride = max(1, min(GRID_STRIDE, size // (4 * GRID_PEAKS)))
        coarse = np.arange(0, size, stride)
        ct = trig[:, coarse]
        h = half_sum[:, None] + np.outer(half_diff, ct[2]) + np.outer(cross, ct[3])
        vals = pq @ ct[:2] + scale * np.sqrt(np.maximum(h, 0.0))
        peak = (vals >= np.roll(vals, 1, axis=1)) & (vals >= np.roll(vals, -1, axis=1))
        k = min(GRID_PEAKS, coarse.size)
        ranked = np.argpartition(np.where(peak, -vals, np.inf), k - 1, axis=1)[:, :k]
        fine = (coarse[ranked][:, :, None] + np.arange(-stride, stride + 1)).reshape(self.n, -1) % size
        ft = trig[:, fine]
        h = half_sum[:, None] + half_diff[:, None] * ft[2] + cross[:, None] * ft[3]
        fine_vals = pq[:, :1] * ft[0] + pq[:, 1:] * ft[1] + scale * np.sqrt(np.maximum(h, 0.0))
        pick = np.argmax(fine_vals, axis=1)
        a = theta[fine[np.arange(self.n), pick]][:, None]
        best = fine_vals[np.arange(self.n), pick][:, None]

        step_cap = 2.0 * np.pi / size
        for _ in range(NEWTON_STEPS):
            c2, s2 = np.cos(2 * a), np.sin(2 * a)
            h = np.maximum(half_sum[:, None] + half_diff[:, None] * c2 + cross[:, None] * s2, 1e-300)
            dh = -2 * half_diff[:, None] * s2 + 2 * cross[:, None] * c2
            d2h = -4 * (h - half_sum[:, None])
            root = np.sqrt(h)
            lin = pq[:, :1] * np.cos(a) + pq[:, 1:] * np.sin(a)
            dlin = -pq[:, :1] * np.sin(a) + pq[:, 1:] * np.cos(a)
            g1 = dlin + scale * dh / (2 * root)
            g2 = -lin + scale * (d2h / (2 * root) - dh**2 / (4 * h * root))
            step = np.where(g2 < 0, -g1 / np.where(g2 < 0, g2, -1.0), np.sign(g1) * step_cap)
            cand = a + np.clip(step, -step_cap, step_cap)
            cand_val = value(cand)
            better = cand_val > best
            a = np.where(better, cand, a)
            best = np.where(better, cand_val, best)
        w = np.concatenate([np.cos(a), np.sin(a)], axis=1)
        return w @ lmap.T

    def observe(self, arms, rewards) -> None:
        self._init_observe(arms, rewards)


class Ucb1(Policy):
    """Index ``mean + sqrt(2 log t / n_u)`` over a finite list of arms; unpulled arms first."""

    name = "ucb1"

    def reset(self, arm_set: ArmSet, n: int = 1) -> None:
        if arm_set.arm_count is None:
            raise PolicyError(f"ucb1 needs a finite arm set, got {arm_set!r}")
        self.arm_set = arm_set
        self.n = n
        m = arm_set.arm_count
        self.counts = np.zeros((n, m))
        self.sums = np.zeros((n, m))
        self._rows = np.arange(n)

    def select(self, t: int) -> NDArray[np.float64]:
        total = self.counts[0].sum()
        if np.any(self.counts[0] == 0):
            idx = np.full(self.n, int(np.argmin(self.counts[0] > 0)))
        else:
            index = self.sums / self.counts + np.sqrt(2.0 * math.log(total) / self.counts)
            idx = np.argmax(index, axis=1)
        self.last_index = idx
        return self.arm_set.candidates[idx]

    def observe(self, arms, rewards) -> None:
        self.counts[self._rows, self.last_index] += 1
        self.sums[self._rows, self.last_index] += rewards


class ExtremePointWrapper(Policy):
    """Run a finite-arm policy on the extreme points of a polytope."""

    def __init__(self, inner: Policy):
        self.inner = inner
        self.name = f"extreme+{inner.name}"

    def reset(self, arm_set: ArmSet, n: int = 1) -> None:
        if not isinstance(arm_set, Polytope):
            raise PolicyError(f"extreme-point reduction needs a polytope, got {arm_set!r}")
        self.arm_set = extreme_points(arm_set)
        self.inner.reset(self.arm_set, n)
        self.init_arms = getattr(self.inner, "init_arms", None)

    @property
    def last_index(self):
        return self.inner.last_index

    @property
    def last_radius(self):
        return self.inner.last_radius

    def select(self, t: int) -> NDArray[np.float64]:
        return self.inner.select(t)

    def observe(self, arms, rewards) -> None:
        self.inner.observe(arms, rewards)


POLICIES = {"pege": Pege, "ue": UncertaintyEllipsoid, "greedy": Greedy, "ucb1": Ucb1}


def make_policy(name: str, **params) -> Policy:
    """Build a policy by name; ``extreme+<name>`` wraps a finite-arm policy."""
    if name.startswith("extreme+"):
        return ExtremePointWrapper(make_policy(name[len("extreme+"):], **params))
    if name not in POLICIES:
        raise PolicyError(f"unknown policy {name!r}; known: {sorted(POLICIES)} or extreme+<name>")
    if name == "ue":
        return UncertaintyEllipsoid(**params)
    if params:
        raise PolicyError(f"policy {name!r} takes no parameters, got {sorted(params)}")
    return POLICIES[name]()

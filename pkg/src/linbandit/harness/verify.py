"""Invariant suites with fixed seeds: each check reports a measured value against its bound."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..environment import (
    BanditInstance,
    GaussianIsotropicPrior,
    GaussianNoise,
    MonteCarloEstimate,
    norm_band_bound,
    norm_band_probability,
    pull,
    stream,
)
from ..estimation import (
    GaussianPosterior,
    directional_risk_terms,
    ols_init,
    posterior_update,
)
from ..geometry import (
    ArmSet,
    Ellipsoid,
    FiniteSet,
    Polytope,
    UnitSphere,
    normalize,
    sbar_check,
)
from ..policies import Pege, UncertaintyEllipsoid
from .runner import fit_scaling, simulate

SEED = 20240601


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    bound: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"[{status}] {self.name}: measured={self.measured:.6g} bound={self.bound:.6g}"
        return text + (f" ({self.detail})" if self.detail else "")


FULL = dict(
    grid=100_000,
    pairs=100_000,
    updates=1000,
    trajectories=1000,
    fiedler=1000,
    mc=200_000,
    pege_reps=500,
    tail_reps=100_000,
    ue_reps=300,
    ue_horizon=4096,
    sbar_pairs=10_000,
    budget_reps=40,
    budget_horizon=1024,
)
QUICK = dict(
    grid=20_000,
    pairs=10_000,
    updates=1000,
    trajectories=200,
    fiedler=200,
    mc=40_000,
    pege_reps=200,
    tail_reps=20_000,
    ue_reps=50,
    ue_horizon=1024,
    sbar_pairs=2000,
    budget_reps=10,
    budget_horizon=256,
)


def _upper(name, est: MonteCarloEstimate, bound, detail=""):
    """``P <= b`` passes when the estimate is at most ``b`` plus 3 standard errors."""
    se = 0.0 if math.isnan(est.stderr) else est.stderr
    return CheckResult(name, est.mean <= bound + 3 * se, est.mean, bound, detail or f"se={se:.3g}")


def _lower(name, est: MonteCarloEstimate, bound, detail=""):
    """``P >= b`` passes when the estimate is at least ``b`` minus 3 standard errors."""
    se = 0.0 if math.isnan(est.stderr) else est.stderr
    return CheckResult(name, est.mean >= bound - 3 * se, est.mean, bound, detail or f"se={se:.3g}")


# -- geometry -----------------------------------------------------------------


def _test_sets() -> list[ArmSet]:
    rng = np.random.default_rng(SEED)
    return [
        UnitSphere(2),
        UnitSphere(5),
        Ellipsoid(np.diag([4.0, 1.0])),
        Ellipsoid(np.array([[2.0, 0.5, 0.0], [0.5, 1.0, 0.2], [0.0, 0.2, 0.5]])),
        FiniteSet(rng.standard_normal((12, 3))),
        Polytope.simplex(3),
        Polytope.hypercube(3),
    ]


def smallest_eigenvalue_bisection(a: np.ndarray, tol: float = 1e-13) -> float:
    """Smallest eigenvalue of a symmetric matrix by bisection on the inertia of ``A - x I``.

    The number of negative pivots of an unpivoted LDL' factorization equals the
    number of eigenvalues below ``x``.
    """

    def below(x):
        m = a - x * np.eye(a.shape[0])
        count = 0
        for k in range(m.shape[0]):
            piv = m[k, k]
            if piv == 0.0:
                piv = -1e-300
            if piv < 0:
                count += 1
            m[k + 1:, k + 1:] -= np.outer(m[k + 1:, k], m[k, k + 1:]) / piv
        return count

    lo = -np.max(np.sum(np.abs(a), axis=1))
    hi = float(np.min(np.diag(a)))
    while hi - lo > tol * max(1.0, abs(hi)):
        mid = 0.5 * (lo + hi)
        if below(mid) >= 1:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def geometry_suite(sizes: dict) -> list[CheckResult]:
    rng = np.random.default_rng(SEED)
    out = []

    worst = 0.0
    for s in _test_sets():
        z = rng.standard_normal((200, s.dim))
        lam = np.exp(rng.uniform(-6, 6, (200, 1)))
        worst = max(worst, float(np.max(np.abs(s.best_arm(lam * z) - s.best_arm(z)))))
    out.append(CheckResult("geometry.best_arm_scale_invariance", worst <= 1e-12, worst, 1e-12))

    # closed-form best arm against a dense boundary grid (dim 2) and brute force (finite sets)
    worst = -np.inf
    for s in (UnitSphere(2), Ellipsoid(np.diag([4.0, 1.0])), Ellipsoid([[3.0, 1.0], [1.0, 2.0]])):
        grid = s.boundary_grid(sizes["grid"])
        z = rng.standard_normal((50, 2))
        closed = np.sum(s.best_arm(z) * z, axis=1)
        worst = max(worst, float(np.max(np.max(z @ grid.T, axis=1) - closed)))
    out.append(CheckResult("geometry.best_arm_vs_grid", worst <= 1e-6, worst, 1e-6))

    worst = 0
    for s in _test_sets():
        if s.candidates is None:
            continue
        z = rng.standard_normal((200, s.dim))
        brute = s.candidates[np.argmax(z @ s.candidates.T, axis=1)]
        worst = max(worst, int(np.sum(np.any(s.best_arm(z) != brute, axis=1))))
    out.append(CheckResult("geometry.best_arm_vs_brute_force", worst == 0, worst, 0))

    min_gap, best_gap = np.inf, 0.0
    for s in _test_sets():
        z = rng.standard_normal((100, s.dim))
        if s.candidates is not None:
            u = s.candidates[rng.integers(0, s.candidates.shape[0], 100)]
        else:
            u = s.best_arm(rng.standard_normal((100, s.dim)))
        min_gap = min(min_gap, float(np.min(s.batch_gap(z, u))))
        best_gap = max(best_gap, float(np.max(np.abs(s.batch_gap(z, s.best_arm(z))))))
    out.append(CheckResult("geometry.gap_nonnegative", min_gap >= -1e-12, min_gap, 0.0))
    out.append(CheckResult("geometry.gap_zero_at_best_arm", best_gap <= 1e-12, best_gap, 1e-12))

    worst = 0.0
    for s in _test_sets():
        sp = s.spanner()
        oracle = smallest_eigenvalue_bisection(sp.gram)
        worst = max(worst, abs(oracle - sp.lambda0) / max(1.0, oracle))
    out.append(CheckResult("geometry.spanner_lambda_min", worst <= 1e-8, worst, 1e-8))

    n = sizes["pairs"]
    dims = rng.integers(2, 9, n)
    worst = 0.0
    for r in np.unique(dims):
        k = int(np.sum(dims == r))
        w = rng.standard_normal((k, r)) * np.exp(rng.uniform(-4, 4, (k, 1)))
        z = rng.standard_normal((k, r)) * np.exp(rng.uniform(-4, 4, (k, 1)))
        lhs = np.linalg.norm(normalize(w) - normalize(z), axis=1)
        rhs = 2 * np.linalg.norm(w - z, axis=1) / np.maximum(np.linalg.norm(z, axis=1), np.linalg.norm(w, axis=1))
        worst = max(worst, float(np.max(lhs / rhs)))
    out.append(CheckResult("geometry.normalized_difference", worst <= 1.0 + 1e-12, worst, 1.0, f"{n} pairs"))

    for s, j in ((UnitSphere(2), 1.0), (UnitSphere(4), 1.0), (Ellipsoid(np.diag([4.0, 1.0])), 4.0)):
        chk = sbar_check(s, j, sizes["sbar_pairs"], seed=SEED)
        out.append(CheckResult(f"geometry.sbar[{s!r}]", chk.passed, chk.worst_ratio, j, f"{chk.n_pairs} pairs"))
    return out


# -- environment --------------------------------------------------------------


def environment_suite(sizes: dict) -> list[CheckResult]:
    rng = np.random.default_rng(SEED + 1)
    out = []

    worst = 0.0
    for s in _test_sets():
        for _ in range(100 // len(_test_sets()) + 1):
            z = rng.standard_normal(s.dim)
            u = s.candidates[rng.integers(s.candidates.shape[0])] if s.candidates is not None else s.best_arm(
                rng.standard_normal(s.dim))
            x = pull(BanditInstance(s, z, GaussianNoise(0.0)), u, rng)
            worst = max(worst, abs(x - float(u @ z)))
    out.append(CheckResult("environment.zero_noise_reward_linear", worst <= 1e-12, worst, 1e-12))

    # cumulative regret equals the running sum of instantaneous regrets
    s = UnitSphere(3)
    z = rng.standard_normal((4, 3))
    noise = rng.standard_normal((4, 300))
    res = simulate(s, Pege(), z, noise, [1, 2, 50, 128, 300], record_steps=True)
    worst = 0.0
    for i, rec in enumerate(res.records):
        sums = np.array([np.sum(rec.instantaneous_regret[:t]) for t in res.checkpoints])
        worst = max(worst, float(np.max(np.abs(sums - res.cumulative_regret[i]))))
    out.append(CheckResult("environment.regret_accumulation", worst <= 1e-12, worst, 1e-12))

    # common random numbers: identical (arm, step) pairs see identical errors
    a = simulate(s, Pege(), z, noise, [300], record_steps=True).records
    b = simulate(s, UncertaintyEllipsoid(alpha=1.0), z, noise, [300], record_steps=True).records
    mismatched = 0
    for ra, rb in zip(a, b):
        same = np.all(ra.arms == rb.arms, axis=1)
        mismatched += int(np.sum(ra.rewards[same] != rb.rewards[same]))
    out.append(CheckResult("environment.common_random_numbers", mismatched == 0, mismatched, 0))

    for r in (2, 8):
        for theta in (0.09, 0.25, 0.5):
            for beta in (1.0, 2.0, 3.0):
                est = norm_band_probability(theta, beta, r, sizes["mc"], stream(SEED, r, "aux"))
                out.append(_lower(f"environment.norm_band[r={r},theta={theta},beta={beta}]", est,
                                  norm_band_bound(theta, beta)))
    return out + gaussian_moment_checks(sizes)


def gaussian_moment_checks(sizes: dict) -> list[CheckResult]:
    """``E||Z|| <= 1`` and ``E[1/||Z||] <= sqrt(pi)`` for ``Z ~ N(0, I/r)``."""
    out = []
    for r in (2, 8):
        norms = np.linalg.norm(GaussianIsotropicPrior(r).sample_many(stream(SEED, 100 + r, "aux"), sizes["mc"]), axis=1)
        out.append(_upper(f"environment.mean_norm[r={r}]", MonteCarloEstimate.from_samples(norms), 1.0))
        out.append(_upper(f"environment.mean_inverse_norm[r={r}]", MonteCarloEstimate.from_samples(1 / norms),
                          math.sqrt(math.pi)))
    return out


# -- estimation ---------------------------------------------------------------


def _random_design(rng, r, m):
    """Spanning initial arms plus ``m`` further arms, with a bounded condition number."""
    init = np.linalg.qr(rng.standard_normal((r, r)))[0] * rng.uniform(0.5, 2.0, r)
    return init, rng.standard_normal((m, r)) * rng.uniform(0.2, 3.0, (m, 1))


def estimation_suite(sizes: dict) -> list[CheckResult]:
    rng = np.random.default_rng(SEED + 2)
    out = []

    sm_err, det_err, inc_err, cond = 0.0, 0.0, 0.0, 0.0
    for r in (2, 4, 8):
        init, arms = _random_design(rng, r, sizes["updates"])
        state = ols_init(init, rng.standard_normal(r))
        for u in arms:
            w = state.weighted_norm_sq(u)
            before = state.log_det_gram
            state.update(u, rng.standard_normal())
            inc_err = max(inc_err, abs((state.log_det_gram - before) - math.log1p(w)))
        gram = init.T @ init + arms.T @ arms
        direct = np.linalg.inv(gram)
        cond = max(cond, float(np.linalg.cond(gram)))
        sm_err = max(sm_err, float(np.linalg.norm(state.gram_inverse - direct) / np.linalg.norm(direct)))
        sign, logdet = np.linalg.slogdet(gram)
        det_err = max(det_err, abs(math.expm1(state.log_det_gram - logdet)))
    out.append(CheckResult("estimation.sherman_morrison_vs_inverse", sm_err < 1e-8, sm_err, 1e-8,
                           f"{sizes['updates']} updates, cond={cond:.3g}"))
    out.append(CheckResult("estimation.determinant_recursion", det_err < 1e-6, det_err, 1e-6))
    out.append(CheckResult("estimation.determinant_increment", inc_err < 1e-12, inc_err, 1e-12))

    worst = 0.0
    for r in (2, 3, 6):
        z = rng.standard_normal(r)
        init, arms = _random_design(rng, r, 200)
        state = ols_init(init, init @ z)
        worst = max(worst, float(np.max(np.abs(state.estimate - z))))
        for u in arms:
            state.update(u, u @ z)
            worst = max(worst, float(np.max(np.abs(state.estimate - z))))
    out.append(CheckResult("estimation.zero_noise_recovery", worst < 1e-9, worst, 1e-9))

    cov_err, bound_slack = 0.0, np.inf
    for k in range(sizes["trajectories"]):
        r = (2, 3, 5, 8)[k % 4]
        steps = int(rng.integers(1, 40))
        z = rng.standard_normal(r) / math.sqrt(r)
        arms = normalize(rng.standard_normal((steps, r)))
        if k % 3 == 0:  # concentrate exploration near one direction
            arms = normalize(arms * np.r_[5.0, np.ones(r - 1)])
        post = GaussianPosterior.isotropic(r)
        for u in arms:
            post = posterior_update(post, u, float(u @ z + rng.standard_normal()), 1.0)
        direct = np.linalg.inv(r * np.eye(r) + arms.T @ arms)
        cov_err = max(cov_err, float(np.max(np.abs(post.covariance - direct))))
        terms = directional_risk_terms(arms, post, z)
        bound_slack = min(bound_slack, float(np.min(terms.variance - 1.0 / (r + terms.exploration))))
    out.append(CheckResult("estimation.posterior_covariance", cov_err < 1e-10, cov_err, 1e-10))
    out.append(CheckResult("estimation.directional_variance_lower_bound", bound_slack >= -1e-10, bound_slack, -1e-10,
                           f"{sizes['trajectories']} trajectories"))

    slack = np.inf
    for _ in range(sizes["fiedler"]):
        b = rng.standard_normal((3, int(rng.integers(1, 4))))
        m = 3 * np.eye(3) + b @ b.T
        slack = min(slack, float(np.min(np.diag(np.linalg.inv(m)) - 1.0 / np.diag(m))))
    out.append(CheckResult("estimation.inverse_diagonal_bound", slack >= -1e-12, slack, 0.0))

    out += pege_estimator_checks(sizes)
    out += radius_tail_checks(sizes)
    return out


def pege_cycle_diagnostics(arm_set: ArmSet, z: np.ndarray, cycles: list[int], seed: int = SEED):
    """Run PEGE and record, at the end of exploration in each listed cycle,
    ``||Z_hat(c) - z||^2`` and the gap of the greedy arm ``G(c)``, per replication."""
    n, r = z.shape
    policy = Pege()
    policy.reset(arm_set, n)
    horizon = Pege.periods_after(max(cycles), r)
    noise = np.stack([stream(seed, i, "noise").standard_normal(horizon) for i in range(n)])
    wanted = set(cycles)
    err, gaps = {}, {}
    for t in range(1, horizon + 1):
        arms = policy.select(t)
        policy.observe(arms, np.sum(arms * z, axis=1) + noise[:, t - 1])
        c = policy.estimate_cycle
        if c in wanted and c not in err and policy.estimate is not None:
            err[c] = np.sum((policy.estimate - z) ** 2, axis=1)
            gaps[c] = arm_set.batch_gap(z, policy.greedy_arm)
    return {c: err[c] for c in cycles}, {c: gaps[c] for c in cycles}


PEGE_CYCLES = [4, 8, 16, 32, 64, 128]


def pege_estimator_checks(sizes: dict) -> list[CheckResult]:
    out = []
    for r in (2, 4):
        z = GaussianIsotropicPrior(r).sample_many(stream(SEED, r, "prior"), sizes["pege_reps"])
        err, _ = pege_cycle_diagnostics(UnitSphere(r), z, PEGE_CYCLES)
        fit = fit_scaling([(c, float(np.mean(err[c]))) for c in PEGE_CYCLES])
        out.append(CheckResult(f"estimation.pege_error_slope[r={r}]", abs(fit.slope + 1) <= 0.15, fit.slope, -1.0,
                               "tolerance 0.15"))
    return out


def radius_tail(alpha: float | None, times=(8, 16, 32), n: int = 100_000, z=(1.0, 0.3), seed: int = SEED):
    """Empirical ``P(u'(Z_hat_t - z) > R_t^u)`` per arm of the two-arm set ``{e1, e2}`` under UE."""
    arm_set = FiniteSet(np.eye(2))
    z = np.broadcast_to(np.asarray(z, dtype=float), (n, 2))
    policy = UncertaintyEllipsoid(sigma0=1.0, alpha=alpha)
    policy.reset(arm_set, n)
    horizon = max(times)
    noise = np.stack([stream(seed, i, "noise").standard_normal(horizon) for i in range(n)])
    out = {}
    for t in range(1, horizon + 1):
        arms = policy.select(t)
        policy.observe(arms, np.sum(arms * z, axis=1) + noise[:, t - 1])
        if t in times:
            scale = policy.params.scale(policy.ols.t, 2)
            radius = scale * np.sqrt(policy.ols.weighted_norms_sq_many(arm_set.candidates))
            excess = (policy.ols.estimate - z) @ arm_set.candidates.T
            out[t] = [MonteCarloEstimate.from_samples(excess[:, k] > radius[:, k]) for k in range(2)]
    return out


def radius_tail_checks(sizes: dict) -> list[CheckResult]:
    out = []
    for t, ests in radius_tail(None, n=sizes["tail_reps"]).items():
        for k, est in enumerate(ests):
            out.append(_upper(f"estimation.radius_tail[t={t},arm=e{k + 1}]", est, 1.0 / t**2))
    return out


# -- policies -----------------------------------------------------------------


def pege_schedule_check(max_cycles: int = 100, dims=(2, 3, 5)) -> CheckResult:
    """Walk the PEGE bookkeeping for ``max_cycles`` cycles and compare with the closed form."""
    bad = 0
    for r in dims:
        arm_set = UnitSphere(r)
        policy = Pege()
        policy.reset(arm_set, 1)
        t = 0
        for k in range(1, max_cycles + 1):
            for j in range(1, r + 1):
                bad += policy.phase != ("explore", j) or policy.cycle != k
                t += 1
                arms = policy.select(t)
                policy.observe(arms, np.zeros(1))
            for rem in range(k, 0, -1):
                bad += policy.phase != ("exploit", rem) or policy.cycle != k
                t += 1
                arms = policy.select(t)
                policy.observe(arms, np.zeros(1))
            bad += t != Pege.periods_after(k, r)
    return CheckResult("policies.pege_schedule", bad == 0, bad, 0, f"K <= {max_cycles}")


def _ue_instances():
    return [
        ("sphere2", UnitSphere(2)),
        ("sphere4", UnitSphere(4)),
        ("ellipsoid", Ellipsoid(np.diag([4.0, 1.0]))),
        ("finite", FiniteSet(np.random.default_rng(SEED).standard_normal((8, 3)))),
        ("simplex", Polytope.simplex(3)),
    ]


def ue_budget_checks(sizes: dict) -> list[CheckResult]:
    out = []
    for label, arm_set in _ue_instances():
        for alpha in (None, 1.0):
            n, horizon = sizes["budget_reps"], sizes["budget_horizon"]
            z = GaussianIsotropicPrior(arm_set.dim).sample_many(stream(SEED, 7, "prior"), n)
            noise = np.stack([stream(SEED, i, "noise").standard_normal(horizon) for i in range(n)])
            res = simulate(arm_set, UncertaintyEllipsoid(alpha=alpha), z, noise, [horizon], diagnostics=True)
            d = res.diagnostics
            tag = f"{label},alpha={'theory' if alpha is None else alpha}"
            out.append(CheckResult(f"policies.ue_weighted_norm_bound[{tag}]", d.norm_violations == 0,
                                   d.max_weighted_norm_sq, d.c0, f"{d.norm_violations} violations"))
            out.append(CheckResult(f"policies.ue_exploration_budget[{tag}]", d.budget_violations == 0,
                                   d.max_budget_ratio, 1.0, f"{d.budget_violations} violations; measured is max sum/bound"))
    return out


def ue_selection_optimality(steps: int = 300, n: int = 20) -> CheckResult:
    """On finite sets, recompute every index after the fact; the chosen arm must attain the max."""
    worst = -np.inf
    for _, arm_set in _ue_instances():
        if arm_set.candidates is None:
            continue
        for alpha in (None, 1.0):
            policy = UncertaintyEllipsoid(alpha=alpha)
            policy.reset(arm_set, n)
            z = GaussianIsotropicPrior(arm_set.dim).sample_many(stream(SEED, 9, "prior"), n)
            rng = stream(SEED, 9, "noise")
            for t in range(1, steps + 1):
                arms = policy.select(t)
                if t > arm_set.dim:
                    idx = policy.indices(arm_set.candidates)
                    chosen = idx[np.arange(n), policy.last_index]
                    worst = max(worst, float(np.max(np.max(idx, axis=1) - chosen)))
                policy.observe(arms, np.sum(arms * z, axis=1) + rng.standard_normal(n))
    return CheckResult("policies.ue_selection_optimal", worst <= 0.0, worst, 0.0)


def ue_pull_counts(alpha: float | None, n: int, horizon: int, z=(1.0, 0.3), seed: int = SEED,
                   diagnostics: bool = False):
    """UE on ``{e1, e2}``: pulls of the suboptimal arm ``e2`` and regret at the default checkpoints."""
    arm_set = FiniteSet(np.eye(2))
    zs = np.broadcast_to(np.asarray(z, dtype=float), (n, 2))
    noise = np.stack([stream(seed, i, "noise").standard_normal(horizon) for i in range(n)])
    cps = [1 << k for k in range(1, horizon.bit_length()) if (1 << k) <= horizon]
    policy = UncertaintyEllipsoid(sigma0=1.0, alpha=alpha)
    res = simulate(arm_set, policy, zs, noise, cps, diagnostics=diagnostics)
    return res, policy.params


def ue_pull_bound_check(sizes: dict) -> CheckResult:
    res, params = ue_pull_counts(None, sizes["ue_reps"], sizes["ue_horizon"])
    horizon = sizes["ue_horizon"]
    bound = 6 + 4 * params.alpha**2 * 2 * math.log(horizon) / 0.7**2
    est = MonteCarloEstimate.from_samples(res.pull_counts[:, 1])
    return _upper("policies.ue_pull_bound[theory alpha]", est, bound, f"alpha={params.alpha:.4f}")


def ue_sublinear_check(sizes: dict) -> CheckResult:
    res, _ = ue_pull_counts(1.0, sizes["ue_reps"], sizes["ue_horizon"])
    horizon = sizes["ue_horizon"]
    per_step = res.cumulative_regret.mean(axis=0) / np.array(res.checkpoints)
    early = per_step[res.checkpoints.index(256)]
    late = per_step[res.checkpoints.index(horizon)]
    return CheckResult("policies.ue_sublinear_regret[alpha=1]", late < 0.5 * early, late / early, 0.5,
                       "ratio of regret/T at the horizon to regret/T at T=256")


def pege_greedy_decay_check(sizes: dict) -> CheckResult:
    z = GaussianIsotropicPrior(2).sample_many(stream(SEED, 2, "prior"), sizes["pege_reps"])
    _, gaps = pege_cycle_diagnostics(UnitSphere(2), z, PEGE_CYCLES)
    fit = fit_scaling([(c, float(np.mean(gaps[c]))) for c in PEGE_CYCLES])
    return CheckResult("policies.pege_greedy_regret_slope", abs(fit.slope + 1) <= 0.2, fit.slope, -1.0,
                       "tolerance 0.2")


def policies_suite(sizes: dict) -> list[CheckResult]:
    return [
        pege_schedule_check(),
        pege_greedy_decay_check(sizes),
        ue_selection_optimality(),
        *ue_budget_checks(sizes),
        ue_pull_bound_check(sizes),
        ue_sublinear_check(sizes),
    ]


SUITES: dict[str, Callable[[dict], list[CheckResult]]] = {
    "geometry": geometry_suite,
    "environment": environment_suite,
    "estimation": estimation_suite,
    "policies": policies_suite,
}


def verify(suite: str = "all", quick: bool = False) -> list[CheckResult]:
    """Run one suite by name, or ``"all"``."""
    sizes = QUICK if quick else FULL
    if suite == "all":
        return [c for name in SUITES for c in SUITES[name](sizes)]
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; known: {sorted(SUITES)} or 'all'")
    return SUITES[suite](sizes)

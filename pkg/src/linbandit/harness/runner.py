"""Monte Carlo engine: batched trajectories, summaries and scaling fits."""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import stats

from ..environment import TrajectoryRecord, stream
from ..estimation import OlsState, ols_init
from ..geometry import ArmSet
from ..policies import Policy, UncertaintyEllipsoid
from .config import ExperimentConfig

WORKERS_ENV = "LINBANDIT_WORKERS"
CSV_COLUMNS = ("policy", "r", "T_checkpoint", "replication", "cumulative_regret")
NORM_SLACK = 1e-9


def default_workers() -> int:
    value = os.environ.get(WORKERS_ENV)
    if value:
        return max(1, int(value))
    return os.cpu_count() or 1


def exploration_budget(c0: float, r: int, steps: int) -> float:
    """Upper bound on the sum of ``steps`` weighted norms ``||U_{t+1}||^2_{C_t}``."""
    c = max(1.0, c0)
    return 2.0 * c * (r * math.log(c) + (r + 1) * math.log(r + steps + 1))


@dataclass
class StepDiagnostics:
    """Checks of the per-step weighted-norm bound and the cumulative exploration budget."""

    c0: float
    steps_checked: int = 0
    max_weighted_norm_sq: float = 0.0
    norm_violations: int = 0
    budget_violations: int = 0
    max_budget_ratio: float = 0.0

    def merge(self, other: "StepDiagnostics") -> "StepDiagnostics":
        return StepDiagnostics(
            self.c0,
            self.steps_checked + other.steps_checked,
            max(self.max_weighted_norm_sq, other.max_weighted_norm_sq),
            self.norm_violations + other.norm_violations,
            self.budget_violations + other.budget_violations,
            max(self.max_budget_ratio, other.max_budget_ratio),
        )


@dataclass
class BatchResult:
    replications: NDArray[np.int64]
    z: NDArray[np.float64]
    checkpoints: list[int]
    cumulative_regret: NDArray[np.float64]
    pull_counts: NDArray[np.int64] | None = None
    diagnostics: StepDiagnostics | None = None
    records: list[TrajectoryRecord] | None = None

    @staticmethod
    def concat(parts: Sequence["BatchResult"]) -> "BatchResult":
        first = parts[0]
        diag = None
        if first.diagnostics is not None:
            diag = first.diagnostics
            for p in parts[1:]:
                diag = diag.merge(p.diagnostics)
        records = None
        if first.records is not None:
            records = [rec for p in parts for rec in p.records]
        counts = None
        if first.pull_counts is not None:
            counts = np.concatenate([p.pull_counts for p in parts])
        return BatchResult(
            np.concatenate([p.replications for p in parts]),
            np.concatenate([p.z for p in parts]),
            first.checkpoints,
            np.concatenate([p.cumulative_regret for p in parts]),
            counts,
            diag,
            records,
        )


def simulate(
    arm_set: ArmSet,
    policy: Policy,
    z: ArrayLike,
    noise: ArrayLike,
    checkpoints: Iterable[int],
    *,
    replications: ArrayLike | None = None,
    seed: int = 0,
    record_steps: bool = False,
    diagnostics: bool = False,
) -> BatchResult:
    """Run ``policy`` on ``n`` replications sharing one arm set.

    ``z`` is ``(n, r)`` and ``noise`` is ``(n, T)``: the error added to whatever
    arm replication ``i`` plays at step ``t`` is ``noise[i, t - 1]``.
    """
    z = np.atleast_2d(np.asarray(z, dtype=float))
    noise = np.atleast_2d(np.asarray(noise, dtype=float))
    n, horizon = noise.shape
    r = arm_set.dim
    if z.shape != (n, r):
        raise ValueError(f"z has shape {z.shape}, expected {(n, r)}")
    checkpoints = sorted(set(checkpoints))
    if checkpoints and checkpoints[-1] > horizon:
        raise ValueError("checkpoint beyond the horizon")
    reps = np.arange(n) if replications is None else np.asarray(replications)

    policy.reset(arm_set, n)
    best = np.asarray(arm_set.max_reward(z), dtype=float).reshape(n)
    cum = np.zeros(n)
    out = np.zeros((n, len(checkpoints)))
    next_cp = 0
    counts = np.zeros((n, arm_set.candidates.shape[0]), dtype=np.int64) if arm_set.candidates is not None else None
    rows = np.arange(n)

    init_arms = policy.init_arms
    track = diagnostics and init_arms is not None
    diag = None
    if track:
        c0 = arm_set.u_bar**2 / arm_set.spanner().lambda0
        diag = StepDiagnostics(c0)
        tracker: OlsState | None = None
        init_rewards = np.zeros((n, r))
        budget_used = np.zeros(n)

    if record_steps:
        rec_arms = np.zeros((n, horizon, r))
        rec_rewards = np.zeros((n, horizon))
        rec_regret = np.zeros((n, horizon))
        rec_norm = np.full((n, horizon), np.nan)
        rec_radius = np.full((n, horizon), np.nan)
        rec_index = np.full((n, horizon), -1, dtype=np.int64) if counts is not None else None

    for t in range(1, horizon + 1):
        arms = policy.select(t)
        means = np.sum(arms * z, axis=1)
        rewards = means + noise[:, t - 1]
        inst = np.maximum(best - means, 0.0)
        cum += inst
        index = getattr(policy, "last_index", None)
        if counts is not None and index is not None:
            counts[rows, index] += 1

        if track:
            if t <= r:
                init_rewards[:, t - 1] = rewards
            else:
                w = tracker.weighted_norm_sq(arms)
                budget_used += w
                diag.steps_checked += n
                diag.max_weighted_norm_sq = max(diag.max_weighted_norm_sq, float(np.max(w)))
                diag.norm_violations += int(np.sum(w > diag.c0 * (1.0 + NORM_SLACK)))
                bound = exploration_budget(diag.c0, r, t - r)
                diag.budget_violations += int(np.sum(budget_used > bound))
                diag.max_budget_ratio = max(diag.max_budget_ratio, float(np.max(budget_used)) / bound)
                if record_steps:
                    rec_norm[:, t - 1] = w

        if record_steps:
            rec_arms[:, t - 1] = arms
            rec_rewards[:, t - 1] = rewards
            rec_regret[:, t - 1] = inst
            radius = getattr(policy, "last_radius", None)
            if radius is not None and t > r:
                rec_radius[:, t - 1] = radius
            if rec_index is not None and index is not None:
                rec_index[:, t - 1] = index

        policy.observe(arms, rewards)
        if track:
            if t == r:
                tracker = ols_init(init_arms, init_rewards)
            elif t > r:
                tracker.update(arms, rewards)

        if next_cp < len(checkpoints) and checkpoints[next_cp] == t:
            out[:, next_cp] = cum
            next_cp += 1

    records = None
    if record_steps:
        records = [
            TrajectoryRecord(
                seed=seed,
                replication=int(reps[i]),
                z=z[i].copy(),
                arms=rec_arms[i],
                rewards=rec_rewards[i],
                instantaneous_regret=rec_regret[i],
                weighted_norm_sq=rec_norm[i],
                radius=rec_radius[i],
                arm_index=None if rec_index is None else rec_index[i],
                checkpoints=list(checkpoints),
            )
            for i in range(n)
        ]
    return BatchResult(reps, z, checkpoints, out, counts, diag, records)


def draw_parameters(config: ExperimentConfig, replications: Sequence[int], z: ArrayLike | None = None):
    """Hidden vectors and error sequences for the given replication indices."""
    prior = config.build_prior()
    noise_model = config.build_noise()
    r = config.build_arm_set().dim
    if z is None:
        zs = np.stack([prior.sample(stream(config.seed, i, "prior")) for i in replications])
    else:
        zs = np.broadcast_to(np.asarray(z, dtype=float), (len(replications), r)).copy()
    noise = np.stack([noise_model.sample(stream(config.seed, i, "noise"), config.horizon) for i in replications])
    return zs, noise


def run_batch(
    config: ExperimentConfig,
    replications: Sequence[int],
    z: ArrayLike | None = None,
    *,
    record_steps: bool = False,
    diagnostics: bool | None = None,
) -> BatchResult:
    replications = list(replications)
    zs, noise = draw_parameters(config, replications, z)
    policy = config.build_policy()
    if diagnostics is None:
        diagnostics = isinstance(getattr(policy, "inner", policy), UncertaintyEllipsoid)
    return simulate(
        config.build_arm_set(),
        policy,
        zs,
        noise,
        config.checkpoint_list,
        replications=replications,
        seed=config.seed,
        record_steps=record_steps,
        diagnostics=diagnostics,
    )


def _run_chunk(args):
    config, reps, z, diagnostics = args
    return run_batch(config, reps, z, diagnostics=diagnostics)


def run_replications(
    config: ExperimentConfig,
    n: int | None = None,
    z: ArrayLike | None = None,
    *,
    workers: int | None = None,
    chunk_size: int | None = None,
    diagnostics: bool | None = None,
) -> BatchResult:
    """Run replications ``0..n-1``, split into chunks across worker processes.

    Results are identical for any chunking: each replication owns its random
    streams and policies never couple replications.
    """
    n = config.replications if n is None else n
    workers = default_workers() if workers is None else workers
    if chunk_size is None:
        chunk_size = max(1, math.ceil(n / workers))
    chunks = [list(range(s, min(n, s + chunk_size))) for s in range(0, n, chunk_size)]
    jobs = [(config, c, z, diagnostics) for c in chunks]
    if workers <= 1 or len(chunks) == 1:
        parts = [_run_chunk(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    return BatchResult.concat(parts)


def run_trajectory(config: ExperimentConfig, z: ArrayLike, replication: int) -> TrajectoryRecord:
    """Full step-level record of one replication with the hidden vector fixed to ``z``."""
    result = run_batch(config, [replication], z, record_steps=True, diagnostics=True)
    return result.records[0]


# -- statistics ---------------------------------------------------------------


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    stderr: float
    ci_low: float
    ci_high: float
    n_points: int


def fit_scaling(series: Iterable[tuple[float, float]]) -> ScalingFit:
    """Least-squares slope of ``log value`` against ``log T``, with a 95% t-interval."""
    pts = np.asarray(list(series), dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 4:
        raise ValueError("need at least 4 (T, value) points")
    if np.any(pts <= 0):
        raise ValueError("T and values must be positive for a log-log fit")
    x, y = np.log(pts[:, 0]), np.log(pts[:, 1])
    res = stats.linregress(x, y)
    half = stats.t.ppf(0.975, pts.shape[0] - 2) * res.stderr
    return ScalingFit(float(res.slope), float(res.intercept), float(res.stderr),
                      float(res.slope - half), float(res.slope + half), pts.shape[0])


@dataclass
class SummaryStats:
    checkpoints: list[int]
    mean: NDArray[np.float64]
    stderr: NDArray[np.float64]
    n: int
    slope: ScalingFit | None = None
    labels: dict = field(default_factory=dict)

    @property
    def ci_low(self) -> NDArray[np.float64]:
        return self.mean - 1.96 * self.stderr

    @property
    def ci_high(self) -> NDArray[np.float64]:
        return self.mean + 1.96 * self.stderr

    def at(self, t: int) -> tuple[float, float]:
        k = self.checkpoints.index(t)
        return float(self.mean[k]), float(self.stderr[k])

    def as_items(self) -> list[tuple[str, str]]:
        items = [(k, str(v)) for k, v in self.labels.items()]
        items.append(("replications", str(self.n)))
        for k, t in enumerate(self.checkpoints):
            items += [
                (f"T{t}.mean", repr(float(self.mean[k]))),
                (f"T{t}.stderr", repr(float(self.stderr[k]))),
                (f"T{t}.ci95_low", repr(float(self.ci_low[k]))),
                (f"T{t}.ci95_high", repr(float(self.ci_high[k]))),
            ]
        if self.slope is not None:
            items += [
                ("slope", repr(self.slope.slope)),
                ("slope.ci95_low", repr(self.slope.ci_low)),
                ("slope.ci95_high", repr(self.slope.ci_high)),
                ("slope.points", str(self.slope.n_points)),
            ]
        return items


def summarize(checkpoints: Sequence[int], values: ArrayLike, labels: dict | None = None) -> SummaryStats:
    values = np.atleast_2d(np.asarray(values, dtype=float))
    n = values.shape[0]
    mean = values.mean(axis=0)
    # shifting by the first row keeps identical replications at exactly zero spread
    shifted = values - values[0]
    stderr = shifted.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.full(mean.shape, np.nan)
    slope = None
    usable = [(t, m) for t, m in zip(checkpoints, mean) if m > 0]
    if len(usable) >= 4:
        slope = fit_scaling(usable)
    return SummaryStats(list(checkpoints), mean, stderr, n, slope, dict(labels or {}))


def estimate_regret(config: ExperimentConfig, z: ArrayLike, n: int | None = None, **kwargs) -> SummaryStats:
    """Regret at every checkpoint with the hidden vector fixed to ``z``."""
    result = run_replications(config, n, z, **kwargs)
    return summarize(result.checkpoints, result.cumulative_regret, _labels(config))


def estimate_bayes_risk(config: ExperimentConfig, n: int | None = None, **kwargs) -> SummaryStats:
    """Bayes risk: a fresh prior draw per replication."""
    result = run_replications(config, n, None, **kwargs)
    return summarize(result.checkpoints, result.cumulative_regret, _labels(config))


def _labels(config: ExperimentConfig) -> dict:
    return {"policy": config.policy_label, "r": config.build_arm_set().dim}


# -- files --------------------------------------------------------------------


def write_csv(path: str | Path, policy: str, r: int, result: BatchResult, append: bool = False) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    new = not (append and path.exists())
    with path.open("a" if append else "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if new:
            writer.writerow(CSV_COLUMNS)
        for i, rep in enumerate(result.replications):
            for k, t in enumerate(result.checkpoints):
                writer.writerow([policy, r, t, int(rep), repr(float(result.cumulative_regret[i, k]))])


def read_csv(path: str | Path) -> dict[tuple[str, int], tuple[list[int], NDArray[np.float64]]]:
    """Group a results CSV by ``(policy, r)`` into ``(checkpoints, (n, K) values)``."""
    groups: dict[tuple[str, int], dict[int, dict[int, float]]] = {}
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        for row in reader:
            key = (row["policy"], int(row["r"]))
            by_rep = groups.setdefault(key, {})
            by_rep.setdefault(int(row["replication"]), {})[int(row["T_checkpoint"])] = float(row["cumulative_regret"])
    out = {}
    for key, by_rep in groups.items():
        checkpoints = sorted({t for rep in by_rep.values() for t in rep})
        values = np.array([[by_rep[rep][t] for t in checkpoints] for rep in sorted(by_rep)])
        out[key] = (checkpoints, values)
    return out


def write_summary(path: str | Path, summaries: Sequence[SummaryStats]) -> None:
    lines = []
    for s in summaries:
        prefix = f"{s.labels.get('policy', 'policy')}.r{s.labels.get('r', '')}"
        lines += [f"{prefix}.{k} = {v}" for k, v in s.as_items() if k not in ("policy", "r")]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

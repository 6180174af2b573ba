"""Seeded Monte Carlo regret experiments.

Each run draws from its own generator built with
``SeedSequence((base_seed, run_id))``, so adding runs never perturbs
earlier ones and parallel execution cannot change results.  Regret is
pseudo-regret: the cumulative gap between the best arm's mean and the
chosen arms' means.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .bandit import AgentKind, AgentSpec, BanditInstance, RewardLaw
from .errors import ConfigurationError, DomainError

THREADS_ENV_VAR = "DPBANDIT_THREADS"


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: an environment, an agent, and Monte Carlo sizes."""

    env: BanditInstance
    agent: AgentSpec
    horizon: int
    runs: int
    base_seed: int

    def __post_init__(self):
        if self.horizon < 1:
            raise ConfigurationError("horizon must be at least 1")
        if self.runs < 1:
            raise ConfigurationError("runs must be at least 1")
        if self.base_seed < 0:
            raise ConfigurationError("base_seed must be a nonnegative integer")
        if self.env.reward_law is not RewardLaw.BERNOULLI:
            raise ConfigurationError("regret experiments need a Bernoulli environment")
        if self.agent.kind is AgentKind.TS_PRIVACY and self.agent.horizon != self.horizon:
            raise ConfigurationError("privacy agent horizon must equal the experiment horizon")


@dataclass(frozen=True)
class RunRecord:
    """One simulated trajectory: actions, rewards, cumulative pseudo-regret."""

    run_id: int
    actions: np.ndarray
    rewards: np.ndarray
    cum_regret: np.ndarray


@dataclass(frozen=True)
class SummaryStats:
    """Aggregates over runs.

    ``std_final_regret`` is the population standard deviation (zero for a
    single run); the confidence halfwidth uses the normal approximation at
    95%.  The per-arm pull means sum to the horizon up to float rounding
    (the underlying integer counts sum to runs * horizon exactly).
    """

    mean_final_regret: float
    std_final_regret: float
    ci95_halfwidth: float
    per_arm_pulls_mean: list[float]


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    records: list[RunRecord]
    summary: SummaryStats


def run_seed(base_seed: int, run_id: int) -> np.random.SeedSequence:
    """The documented per-run seed mix: SeedSequence((base_seed, run_id))."""
    return np.random.SeedSequence((base_seed, run_id))


def _generator(seed_seq: np.random.SeedSequence) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed_seq))


def run_once(config: ExperimentConfig, run_id: int) -> RunRecord:
    """Simulate one run; a pure function of (config, run_id)."""
    rng = _generator(run_seed(config.base_seed, run_id))
    means = np.asarray(config.env.arm_means, dtype=np.float64)
    if config.agent.kind is AgentKind.UCB1:
        actions, rewards = kernels.ucb1_run(means, config.horizon, rng)
    else:
        actions, rewards = kernels.ts_run(
            means, config.horizon, config.agent.noise_scale(), rng
        )
    gaps = config.env.best_mean - means[actions]
    return RunRecord(run_id, actions, rewards, np.cumsum(gaps))


def thread_count(task_count: int) -> int:
    """Worker count: DPBANDIT_THREADS if set, else machine parallelism."""
    env_value = os.environ.get(THREADS_ENV_VAR)
    if env_value is not None:
        try:
            limit = int(env_value)
        except ValueError:
            raise ConfigurationError(f"{THREADS_ENV_VAR} must be an integer") from None
        if limit < 1:
            raise ConfigurationError(f"{THREADS_ENV_VAR} must be at least 1")
    else:
        limit = os.cpu_count() or 1
    return max(1, min(limit, task_count))


def run_many(config: ExperimentConfig, parallel: bool | None = None) -> ExperimentResult:
    """Simulate all runs and aggregate.

    Output is identical whether runs execute sequentially or in parallel:
    each run owns its seed-derived stream and results are aggregated in
    run_id order.
    """
    workers = thread_count(config.runs) if parallel is not False else 1
    if parallel is True:
        workers = max(workers, 2)
    run_ids = range(config.runs)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda r: run_once(config, r), run_ids))
    else:
        records = [run_once(config, r) for r in run_ids]
    return ExperimentResult(config, records, summarize(config, records))


def summarize(config: ExperimentConfig, records: list[RunRecord]) -> SummaryStats:
    """Aggregate records (assumed ordered by run_id) in a fixed order."""
    runs = len(records)
    finals = np.array([rec.cum_regret[-1] for rec in records], dtype=np.float64)
    mean = float(finals.mean())
    std = float(finals.std())  # population std: zero for a single run
    ci95 = 1.96 * std / math.sqrt(runs)
    counts = np.zeros(config.env.n_arms, dtype=np.int64)
    for rec in records:
        counts += np.bincount(rec.actions, minlength=config.env.n_arms)
    per_arm = [float(c) / runs for c in counts]
    return SummaryStats(mean, std, ci95, per_arm)


def regret_bound_privacy(horizon: int, n_arms: int, epsilon: float) -> float:
    """Predicted regret of the privacy-tuned sampler: (ln T)^2/eps + sqrt(KT ln K)."""
    if horizon < 2:
        raise DomainError("horizon must be at least 2")
    if n_arms < 2:
        raise DomainError("the bound requires at least two arms (ln K > 0)")
    if not epsilon > 0.0:
        raise DomainError("epsilon must be positive")
    t = float(horizon)
    k = float(n_arms)
    return math.log(t) ** 2 / epsilon + math.sqrt(k * t * math.log(k))


def mean_suboptimal_pulls(result: ExperimentResult) -> float:
    """Average number of pulls of gap-positive arms per run."""
    means = result.config.env.arm_means
    best = max(means)
    suboptimal = np.array([m < best for m in means], dtype=bool)
    if not suboptimal.any():
        return 0.0
    total = 0
    for rec in result.records:
        counts = np.bincount(rec.actions, minlength=len(means))
        total += int(counts[suboptimal].sum())
    return total / len(result.records)


def suboptimal_pull_inflation(std: ExperimentResult, priv: ExperimentResult) -> float:
    """Extra suboptimal pulls of the privacy agent over the standard one.

    Both result sets must come from the same environment and horizon.
    """
    if std.config.env != priv.config.env:
        raise ConfigurationError("result sets come from different environments")
    if std.config.horizon != priv.config.horizon:
        raise ConfigurationError("result sets come from different horizons")
    return mean_suboptimal_pulls(priv) - mean_suboptimal_pulls(std)

"""Empirical privacy estimation on neighboring reward tapes.

The audited observable is the full action sequence of a run at a small
horizon (the histograms are exhaustive over all K^T sequences).  Two tapes
differing in exactly one reward entry are played many times; per-outcome
exact binomial bounds then give a conservative lower bound on the epsilon
that any (epsilon, delta) guarantee for the agent must exceed.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import beta as beta_dist

from . import kernels
from .accountant import PrivacyBudget
from .bandit import AgentKind, AgentSpec
from .errors import ConfigurationError, EstimationError
from .harness import thread_count

# Exhaustive-histogram limit on K^T outcome sequences.
MAX_OUTCOMES = 4096

# Trials are seeded in fixed-size blocks: block j draws from
# SeedSequence(seed + (j,)) and its trials consume that stream in order,
# so results are independent of the execution schedule.
TRIAL_BLOCK = 1024

# Per-outcome confidence level 1 - 0.01 / K^T: Bonferroni over all
# outcomes keeps the global verdict conservative at 99%.
GLOBAL_SIGNIFICANCE = 0.01


@dataclass(frozen=True)
class RewardTape:
    """A (T, K) matrix of predetermined rewards in [0, 1]."""

    rewards: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.rewards, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ConfigurationError("tape must be a nonempty (rounds, arms) matrix")
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise ConfigurationError("tape rewards must lie in [0, 1]")
        arr.flags.writeable = False
        object.__setattr__(self, "rewards", arr)

    @property
    def horizon(self) -> int:
        return self.rewards.shape[0]

    @property
    def n_arms(self) -> int:
        return self.rewards.shape[1]


@dataclass(frozen=True)
class NeighborPair:
    """Two tapes differing in exactly one entry: base and its single edit."""

    base: RewardTape
    round: int
    arm: int
    alt_reward: float

    def __post_init__(self):
        if not 0 <= self.round < self.base.horizon:
            raise ConfigurationError("edited round outside the tape")
        if not 0 <= self.arm < self.base.n_arms:
            raise ConfigurationError("edited arm outside the tape")
        if not 0.0 <= self.alt_reward <= 1.0:
            raise ConfigurationError("alternative reward must lie in [0, 1]")
        if self.alt_reward == self.base.rewards[self.round, self.arm]:
            raise ConfigurationError(
                "alternative reward equals the base entry; tapes would not be neighbors"
            )

    def neighbor(self) -> RewardTape:
        edited = self.base.rewards.copy()
        edited[self.round, self.arm] = self.alt_reward
        return RewardTape(edited)


@dataclass(frozen=True)
class OutcomeHistogram:
    """Counts of observed action sequences (as length-T tuples of arms)."""

    counts: dict[tuple[int, ...], int]
    trials: int
    horizon: int
    n_arms: int

    def __post_init__(self):
        if sum(self.counts.values()) != self.trials:
            raise ConfigurationError("histogram counts do not sum to trials")


@dataclass(frozen=True)
class EpsilonEstimate:
    eps_hat: float
    ci_upper: float


@dataclass(frozen=True)
class AuditReport:
    eps_hat: float
    ci_upper: float
    eps_analytical: float
    passed: bool
    low_power: bool
    delta: float


def outcome_space_size(horizon: int, n_arms: int) -> int:
    size = n_arms**horizon
    if size > MAX_OUTCOMES:
        raise ConfigurationError(
            f"{n_arms}^{horizon} = {size} outcome sequences exceed the "
            f"exhaustive-histogram limit of {MAX_OUTCOMES}"
        )
    return size


def _decode(code: int, horizon: int, n_arms: int) -> tuple[int, ...]:
    arms = []
    for _ in range(horizon):
        arms.append(code % n_arms)
        code //= n_arms
    return tuple(reversed(arms))


def _seed_tuple(seed) -> tuple[int, ...]:
    if isinstance(seed, (int, np.integer)):
        return (int(seed),)
    return tuple(int(s) for s in seed)


def _block_generator(seed: tuple[int, ...], block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed + (block,))))


def _ucb1_tape_sequence(tape: RewardTape) -> int:
    # UCB1 consumes no randomness on a tape: one trajectory serves all trials.
    horizon, n_arms = tape.horizon, tape.n_arms
    pulls = [0] * n_arms
    sums = [0.0] * n_arms
    code = 0
    for t in range(horizon):
        if t < n_arms:
            best = t
        else:
            best_index = -math.inf
            best = 0
            for i in range(n_arms):
                index = sums[i] / pulls[i] + math.sqrt(2.0 * math.log(t) / pulls[i])
                if index > best_index:
                    best = i
                    best_index = index
        pulls[best] += 1
        sums[best] += tape.rewards[t, best]
        code = code * n_arms + best
    return code


def run_on_tape(agent: AgentSpec, tape: RewardTape, trials: int, seed) -> OutcomeHistogram:
    """Histogram the action sequences of ``trials`` independent runs on a tape."""
    if trials < 0:
        raise ConfigurationError("trials must be nonnegative")
    size = outcome_space_size(tape.horizon, tape.n_arms)
    if trials == 0:
        return OutcomeHistogram({}, 0, tape.horizon, tape.n_arms)

    totals = np.zeros(size, dtype=np.int64)
    if agent.kind is AgentKind.UCB1:
        totals[_ucb1_tape_sequence(tape)] = trials
    else:
        seed_base = _seed_tuple(seed)
        noise_scale = agent.noise_scale()
        blocks = [
            (j, min(TRIAL_BLOCK, trials - j * TRIAL_BLOCK))
            for j in range((trials + TRIAL_BLOCK - 1) // TRIAL_BLOCK)
        ]

        def one_block(spec):
            j, block_trials = spec
            rng = _block_generator(seed_base, j)
            codes = kernels.tape_trials(tape.rewards, noise_scale, block_trials, rng)
            return np.bincount(codes, minlength=size)

        workers = thread_count(len(blocks))
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                for counts in pool.map(one_block, blocks):
                    totals += counts
        else:
            for spec in blocks:
                totals += one_block(spec)

    counts = {
        _decode(code, tape.horizon, tape.n_arms): int(n)
        for code, n in enumerate(totals)
        if n > 0
    }
    return OutcomeHistogram(counts, trials, tape.horizon, tape.n_arms)


def _clopper_pearson(successes: int, trials: int, significance: float) -> tuple[float, float]:
    """Exact two-sided binomial confidence bounds."""
    if successes == 0:
        lower = 0.0
    else:
        lower = float(beta_dist.ppf(significance / 2.0, successes, trials - successes + 1))
    if successes == trials:
        upper = 1.0
    else:
        upper = float(
            beta_dist.ppf(1.0 - significance / 2.0, successes + 1, trials - successes)
        )
    return lower, upper


def estimate_epsilon(
    h_a: OutcomeHistogram, h_b: OutcomeHistogram, delta: float
) -> EpsilonEstimate:
    """Conservative empirical lower bound on epsilon, with its loose companion.

    For every outcome, ``eps_hat`` uses the lower bound of the more likely
    histogram against the upper bound of the other, minus the delta slack;
    ``ci_upper`` swaps the bound directions (anti-conservative, reported
    for context; infinite when no outcome has a positive lower bound on
    both sides).  Both are symmetrized over the A/B ordering and floored
    at zero.
    """
    if h_a.trials != h_b.trials:
        raise EstimationError("histograms have different trial counts")
    if h_a.trials == 0 or h_b.trials == 0:
        raise EstimationError("cannot estimate from an empty histogram")
    if (h_a.horizon, h_a.n_arms) != (h_b.horizon, h_b.n_arms):
        raise EstimationError("histograms cover different outcome spaces")
    if delta < 0.0:
        raise EstimationError("delta slack must be nonnegative")

    trials = h_a.trials
    size = outcome_space_size(h_a.horizon, h_a.n_arms)
    significance = GLOBAL_SIGNIFICANCE / size

    eps_hat = 0.0
    ci_upper = 0.0
    any_upper = False
    for outcome in sorted(set(h_a.counts) | set(h_b.counts)):
        a_lo, a_hi = _clopper_pearson(h_a.counts.get(outcome, 0), trials, significance)
        b_lo, b_hi = _clopper_pearson(h_b.counts.get(outcome, 0), trials, significance)
        for p_lo, p_hi, q_lo, q_hi in ((a_lo, a_hi, b_lo, b_hi), (b_lo, b_hi, a_lo, a_hi)):
            if p_lo - delta > 0.0 and q_hi > 0.0:
                eps_hat = max(eps_hat, math.log((p_lo - delta) / q_hi))
            if p_hi - delta > 0.0 and q_lo > 0.0:
                any_upper = True
                ci_upper = max(ci_upper, math.log((p_hi - delta) / q_lo))
    if not any_upper:
        ci_upper = math.inf
    return EpsilonEstimate(eps_hat, ci_upper)


def low_power_flag(h_a: OutcomeHistogram, h_b: OutcomeHistogram) -> bool:
    """True when even the most frequent outcome has fewer than 100 counts."""
    max_a = max(h_a.counts.values(), default=0)
    max_b = max(h_b.counts.values(), default=0)
    return min(max_a, max_b) < 100


def implied_count_trajectory(pair: NeighborPair) -> list[int]:
    """Worst-case release counts for the edited arm: every round from the edit on."""
    return list(range(pair.base.horizon - pair.round))


def audit_algorithm(
    agent: AgentSpec,
    pair: NeighborPair,
    trials: int,
    seed,
    budget: PrivacyBudget,
    estimator_delta: float | None = None,
) -> AuditReport:
    """Compare the empirical epsilon lower bound against an analytical budget.

    The two tapes are played on disjoint sub-streams of ``seed``.  The
    estimator's delta slack defaults to T^-4.
    """
    if estimator_delta is None:
        estimator_delta = float(pair.base.horizon) ** -4
    seed_base = _seed_tuple(seed)
    h_base = run_on_tape(agent, pair.base, trials, seed_base + (0,))
    h_edit = run_on_tape(agent, pair.neighbor(), trials, seed_base + (1,))
    estimate = estimate_epsilon(h_base, h_edit, estimator_delta)
    return AuditReport(
        eps_hat=estimate.eps_hat,
        ci_upper=estimate.ci_upper,
        eps_analytical=budget.epsilon,
        passed=estimate.eps_hat <= budget.epsilon,
        low_power=low_power_flag(h_base, h_edit),
        delta=estimator_delta,
    )

"""Bandit environments and agents.

Agents: Gaussian-posterior Thompson sampling with the standard per-arm
variance ``1/(pulls+1)``, a privacy-tuned variant that inflates that
variance to ``(ln T)^2 / (epsilon * (pulls+1))``, and a deterministic UCB1
baseline.

All randomness is consumed from a ``numpy.random.Generator``: one Gaussian
draw per arm per selection (arm-index order) and one uniform draw per
Bernoulli reward.  Runs are therefore bit-reproducible given the seed, and
the compiled kernels in :mod:`dpbandit._ckernels` replay the exact same
stream (see ``dpbandit.kernels``).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError


class RewardLaw(enum.Enum):
    BERNOULLI = "bernoulli"
    TAPE = "tape"  # rewards come from a predetermined tape (audit module)


class AgentKind(enum.Enum):
    TS_STANDARD = "ts"
    TS_PRIVACY = "ts-dp"
    UCB1 = "ucb1"


@dataclass(frozen=True)
class BanditInstance:
    """A K-armed environment with means in [0, 1].

    Rewards are Bernoulli by default; ``RewardLaw.TAPE`` marks an instance
    whose rewards are supplied externally by the audit loop.
    """

    arm_means: tuple[float, ...]
    reward_law: RewardLaw = RewardLaw.BERNOULLI

    def __post_init__(self):
        means = tuple(float(m) for m in self.arm_means)
        object.__setattr__(self, "arm_means", means)
        if len(means) < 1:
            raise ConfigurationError("environment needs at least one arm")
        for m in means:
            if not 0.0 <= m <= 1.0:
                raise DomainError(f"arm mean {m} outside [0, 1]")

    @property
    def n_arms(self) -> int:
        return len(self.arm_means)

    @property
    def best_mean(self) -> float:
        return max(self.arm_means)


@dataclass(frozen=True)
class ArmPosterior:
    """Sufficient statistics of one arm: pull count and reward sum.

    The posterior mean uses the shifted denominator ``pulls + 1``, so an
    unpulled arm has mean 0 and unit variance under the standard agent.
    """

    pulls: int = 0
    reward_sum: float = 0.0

    def __post_init__(self):
        if self.pulls < 0:
            raise DomainError("pull count must be nonnegative")
        # rewards are bounded by 1, so the sum cannot exceed the pull count
        if self.reward_sum < 0.0 or self.reward_sum > self.pulls + 1e-9:
            raise DomainError("reward sum outside [0, pulls]")

    @property
    def mean(self) -> float:
        return self.reward_sum / (self.pulls + 1)


@dataclass(frozen=True)
class AgentSpec:
    """Which agent to run and its parameters.

    ``epsilon_target`` and ``horizon`` are required (and only meaningful)
    for the privacy-tuned sampler: its per-arm sampling variance is
    ``(ln horizon)^2 / (epsilon_target * (pulls+1))``.
    """

    kind: AgentKind
    epsilon_target: float | None = None
    horizon: float | None = None

    def __post_init__(self):
        if self.kind is AgentKind.TS_PRIVACY:
            if self.epsilon_target is None or not self.epsilon_target > 0.0:
                raise ConfigurationError("privacy agent requires epsilon_target > 0")
            if self.horizon is None or self.horizon < 2:
                raise ConfigurationError(
                    "privacy agent requires horizon >= 2 (log(horizon) must be positive)"
                )

    @classmethod
    def standard(cls) -> "AgentSpec":
        return cls(AgentKind.TS_STANDARD)

    @classmethod
    def privacy(cls, epsilon_target: float, horizon: float) -> "AgentSpec":
        return cls(AgentKind.TS_PRIVACY, epsilon_target=epsilon_target, horizon=horizon)

    @classmethod
    def ucb1(cls) -> "AgentSpec":
        return cls(AgentKind.UCB1)

    def noise_scale(self) -> float:
        """Multiplier applied to the standard variance 1/(pulls+1).

        Computed as a single ratio so that ``epsilon_target == log(horizon)**2``
        yields exactly 1.0 in floating point, making the privacy agent
        bit-identical to the standard one at that setting.
        """
        if self.kind is AgentKind.TS_PRIVACY:
            return math.log(self.horizon) ** 2 / self.epsilon_target
        return 1.0


@dataclass
class AgentState:
    """Per-run mutable state: one posterior per arm plus the round counter."""

    posteriors: list[ArmPosterior]
    round: int = 0

    @classmethod
    def fresh(cls, n_arms: int) -> "AgentState":
        return cls([ArmPosterior() for _ in range(n_arms)], 0)

    @property
    def n_arms(self) -> int:
        return len(self.posteriors)

    def total_pulls(self) -> int:
        return sum(p.pulls for p in self.posteriors)


def posterior_update(post: ArmPosterior, reward: float) -> ArmPosterior:
    """Fold one observed reward into an arm's statistics.

    Rewards must lie in [0, 1]; the privacy accounting assumes a single
    reward change moves the sum by at most 1.
    """
    reward = float(reward)
    if not 0.0 <= reward <= 1.0:
        raise DomainError(f"reward {reward} outside [0, 1]")
    return ArmPosterior(post.pulls + 1, post.reward_sum + reward)


def posterior_variance(post: ArmPosterior, spec: AgentSpec) -> float:
    """Sampling variance of the arm's Gaussian posterior under ``spec``."""
    if spec.kind is AgentKind.UCB1:
        raise ConfigurationError("posterior variance is defined for sampling agents only")
    return spec.noise_scale() / (post.pulls + 1)


def posterior_sample(post: ArmPosterior, spec: AgentSpec, rng: np.random.Generator) -> float:
    """Draw one posterior sample; consumes exactly one Gaussian draw."""
    return rng.normal(post.mean, math.sqrt(posterior_variance(post, spec)))


def select_action(state: AgentState, spec: AgentSpec, rng: np.random.Generator) -> int:
    """Thompson selection: sample every arm, return the argmax.

    All arms are sampled every round (fresh draws, including unpulled arms),
    consuming exactly K draws in arm-index order.  Ties break to the lowest
    arm index.
    """
    best = 0
    best_theta = -math.inf
    for i, post in enumerate(state.posteriors):
        theta = posterior_sample(post, spec, rng)
        if theta > best_theta:
            best = i
            best_theta = theta
    return best


def ucb1_select(state: AgentState, rng: np.random.Generator) -> int:
    """UCB1 index policy; consumes no randomness.

    Each arm is played once in index order during rounds t < K.  Afterwards
    the index is the conventional mean (denominator = pulls, not pulls+1)
    plus sqrt(2 ln t / pulls).  Ties break to the lowest arm index.
    """
    del rng  # deterministic policy; parameter kept for interface uniformity
    t = state.round
    if t < state.n_arms:
        return t
    best = 0
    best_index = -math.inf
    for i, post in enumerate(state.posteriors):
        index = post.reward_sum / post.pulls + math.sqrt(2.0 * math.log(t) / post.pulls)
        if index > best_index:
            best = i
            best_index = index
    return best


def step(
    env: BanditInstance,
    state: AgentState,
    spec: AgentSpec,
    rng: np.random.Generator,
) -> tuple[int, float, AgentState]:
    """Advance one round: select, draw the reward, update that arm only.

    The Bernoulli reward consumes exactly one uniform draw.  Returns the
    action, the realized reward, and the successor state (the input state is
    not mutated).
    """
    if env.reward_law is not RewardLaw.BERNOULLI:
        raise ConfigurationError("tape environments are driven by the audit loop, not step()")
    if spec.kind is AgentKind.TS_PRIVACY and state.round >= spec.horizon:
        raise ConfigurationError("privacy agent stepped past its configured horizon")
    if spec.kind is AgentKind.UCB1:
        action = ucb1_select(state, rng)
    else:
        action = select_action(state, spec, rng)
    reward = 1.0 if rng.random() < env.arm_means[action] else 0.0
    posteriors = list(state.posteriors)
    posteriors[action] = posterior_update(posteriors[action], reward)
    return action, reward, AgentState(posteriors, state.round + 1)

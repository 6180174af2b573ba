"""Privacy accounting for the Gaussian posterior sampler.

A posterior sample for an arm with ``k`` pulls is a Gaussian release with
standard deviation ``1/sqrt(k+1)`` whose mean moves by at most
``w = 1/(k+1)`` when a single reward in the history changes.  This module
calibrates that release as a Gaussian mechanism, evaluates the closed-form
per-release epsilon, and composes many releases into a total budget.

Calibration uses the sufficient condition

    sigma >= (w / eps) * sqrt(2 ln(1/(2 delta)) + 2 eps),    delta < 1/2,

i.e. the sensitivity multiplies the noise requirement.  Under this reading
the closed form ``eps_k = 1/sqrt(k+1) + sqrt((1 + 2 ln(1/(2 delta)))/(k+1))``
is exact at k = 0 and a valid upper bound for every k (the alternative
reading with the sensitivity dividing the bound would make the requirement
grow with k, contradicting both the closed form's decay and the
``O(ln^2 T)`` total; tests verify sufficiency on a large grid).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DomainError

# Absorbs last-ulp rounding in the calibration comparison: the closed form
# meets the noise requirement with exact equality at k = 0, where a strict
# float comparison would otherwise flip on the rounding of the logarithm.
_CHECK_RTOL = 1e-12


class Branch(enum.Enum):
    """Which composition expression attained the minimum."""

    BASIC = "Basic"
    ADVANCED_A = "AdvancedA"
    ADVANCED_B = "AdvancedB"


@dataclass(frozen=True)
class GaussianMechParams:
    """Gaussian-release parameters: noise sigma, sensitivity w, and delta."""

    sigma: float
    sensitivity: float
    delta: float

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise DomainError("sigma must be positive")
        if not self.sensitivity > 0.0:
            raise DomainError("sensitivity must be positive")
        if not 0.0 < self.delta < 0.5:
            raise DomainError("delta must lie in (0, 1/2)")


@dataclass(frozen=True)
class StepPrivacy:
    """The (epsilon, delta) cost of one mechanism invocation."""

    epsilon: float
    delta: float = 0.0

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise DomainError("per-step epsilon must be positive")
        if not 0.0 <= self.delta < 0.5:
            raise DomainError("per-step delta must lie in [0, 1/2)")


@dataclass(frozen=True)
class CompositionInput:
    """An ordered list of per-step costs plus the composition slack."""

    steps: tuple[StepPrivacy, ...]
    slack: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        if not 0.0 <= self.slack < 1.0:
            raise DomainError("slack must lie in [0, 1)")


@dataclass(frozen=True)
class PrivacyBudget:
    """A composed (epsilon, delta) pair and the branch that attained it."""

    epsilon: float
    delta: float
    branch: Branch

    def __post_init__(self):
        if self.epsilon < 0.0:
            raise DomainError("composed epsilon must be nonnegative")
        if not 0.0 <= self.delta < 1.0:
            raise DomainError("composed delta must lie in [0, 1)")


def sensitivity(pulls: int) -> float:
    """Maximum shift of an arm's posterior mean when one reward changes."""
    if pulls < 0:
        raise DomainError("pull count must be nonnegative")
    return 1.0 / (pulls + 1)


def gaussian_mech_check(p: GaussianMechParams, epsilon: float) -> bool:
    """True iff the noise level suffices for (epsilon, delta) privacy."""
    if not epsilon > 0.0:
        raise DomainError("epsilon must be positive")
    required = (p.sensitivity / epsilon) * math.sqrt(
        2.0 * math.log(1.0 / (2.0 * p.delta)) + 2.0 * epsilon
    )
    return p.sigma >= required * (1.0 - _CHECK_RTOL)


def gaussian_mech_eps_min(sigma: float, sensitivity: float, delta: float) -> float:
    """Smallest epsilon the Gaussian release satisfies at this noise level.

    Solving ``sigma = (w/eps) sqrt(2L + 2 eps)`` with ``s = sigma/w`` and
    ``L = ln(1/(2 delta))`` gives the positive root of
    ``s^2 eps^2 - 2 eps - 2L = 0``.
    """
    params = GaussianMechParams(sigma, sensitivity, delta)  # validates domains
    s = params.sigma / params.sensitivity
    big_l = math.log(1.0 / (2.0 * params.delta))
    return (1.0 + math.sqrt(1.0 + 2.0 * s * s * big_l)) / (s * s)


def eps_step_closed_form(pulls: int, delta: float) -> float:
    """Closed-form per-release epsilon for an arm with ``pulls`` pulls.

    ``1/sqrt(k+1) + sqrt((1 + 2 ln(1/(2 delta)))/(k+1))`` — exact at k = 0
    and an upper bound on :func:`gaussian_mech_eps_min` for k >= 1 (the
    release has sigma = 1/sqrt(k+1), sensitivity 1/(k+1)).
    """
    if pulls < 0:
        raise DomainError("pull count must be nonnegative")
    if not 0.0 < delta < 0.5:
        raise DomainError("delta must lie in (0, 1/2)")
    shifted = pulls + 1
    big_l = math.log(1.0 / (2.0 * delta))
    return 1.0 / math.sqrt(shifted) + math.sqrt((1.0 + 2.0 * big_l) / shifted)


def _advanced_first_term(epsilons: Sequence[float]) -> float:
    # sum of eps*(e^eps - 1)/(e^eps + 1), computed as eps*tanh(eps/2)
    # (algebraically identical, immune to exp overflow)
    return math.fsum(e * math.tanh(0.5 * e) for e in epsilons)


def _composed_delta(deltas: Iterable[float], slack: float) -> float:
    # 1 - (1 - slack) * prod(1 - delta_i), evaluated in log space so that
    # tiny deltas are not rounded away against 1.0
    log_keep = math.log1p(-slack) + math.fsum(math.log1p(-d) for d in deltas)
    return -math.expm1(log_keep)


def compose(comp: CompositionInput) -> PrivacyBudget:
    """Compose per-step costs into a total (epsilon, delta) budget.

    The total epsilon is the minimum of three valid expressions over the
    step epsilons: (Basic) their plain sum; (AdvancedA/B) a first-order sum
    plus a slack-dependent square-root term.  The total delta is
    ``1 - (1 - slack) * prod(1 - delta_i)``.  With zero slack only the
    Basic branch is admissible.
    """
    steps = comp.steps
    slack = comp.slack
    if not steps:
        return PrivacyBudget(0.0, _composed_delta((), slack), Branch.BASIC)

    epsilons = [s.epsilon for s in steps]
    delta_total = _composed_delta((s.delta for s in steps), slack)

    basic = math.fsum(epsilons)
    candidates = [(basic, Branch.BASIC)]
    if slack > 0.0:
        first = _advanced_first_term(epsilons)
        sum_sq = math.fsum(e * e for e in epsilons)
        adv_a = first + math.sqrt(
            2.0 * sum_sq * math.log(math.e + math.sqrt(sum_sq) / slack)
        )
        adv_b = first + math.sqrt(2.0 * sum_sq * math.log(1.0 / slack))
        candidates.append((adv_a, Branch.ADVANCED_A))
        candidates.append((adv_b, Branch.ADVANCED_B))

    eps_total, branch = min(candidates, key=lambda c: c[0])
    return PrivacyBudget(eps_total, delta_total, branch)


def account_run(
    count_trajectory: Sequence[int], delta_step: float, slack: float
) -> PrivacyBudget:
    """Budget for a run releasing one posterior sample per listed count.

    Each count k is charged the closed-form epsilon at ``delta_step``; the
    steps are then composed with the given slack.
    """
    counts = list(count_trajectory)
    if not counts:
        raise DomainError("count trajectory must be nonempty")
    steps = tuple(
        StepPrivacy(eps_step_closed_form(k, delta_step), delta_step) for k in counts
    )
    return compose(CompositionInput(steps, slack))


def default_count_trajectory(horizon: int) -> list[int]:
    """Worst-case counts 0..T-1: the released arm gains a pull every round."""
    if horizon < 1:
        raise DomainError("horizon must be at least 1")
    return list(range(horizon))


def default_delta_step(horizon: int) -> float:
    """Per-release delta T^-5 / 2 (see :func:`default_slack`)."""
    if horizon < 2:
        raise DomainError("horizon must be at least 2")
    return float(horizon) ** -5 / 2.0


def default_slack(horizon: int) -> float:
    """Composition slack T^-4 / 2.

    Splitting the total this way keeps the composed delta below T^-4:
    ``1 - (1 - T^-4/2)(1 - T^-5/2)^T <= T^-4`` for every T >= 2.
    """
    if horizon < 2:
        raise DomainError("horizon must be at least 2")
    return float(horizon) ** -4 / 2.0


def asymptotic_budget(horizon: int) -> PrivacyBudget:
    """The sampler's headline budget after T rounds: ((ln T)^2, T^-4).

    Used for reporting next to composed budgets; not itself the output of a
    composition.
    """
    if horizon < 2:
        raise DomainError("horizon must be at least 2")
    t = float(horizon)
    return PrivacyBudget(math.log(t) ** 2, t**-4, Branch.BASIC)

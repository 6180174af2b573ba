"""Gaussian-posterior Thompson sampling lab with privacy accounting and audits."""

from .accountant import (
    Branch,
    CompositionInput,
    GaussianMechParams,
    PrivacyBudget,
    StepPrivacy,
    account_run,
    asymptotic_budget,
    compose,
    eps_step_closed_form,
    gaussian_mech_check,
    gaussian_mech_eps_min,
    sensitivity,
)
from .audit import (
    AuditReport,
    NeighborPair,
    OutcomeHistogram,
    RewardTape,
    audit_algorithm,
    estimate_epsilon,
    run_on_tape,
)
from .bandit import (
    AgentKind,
    AgentSpec,
    AgentState,
    ArmPosterior,
    BanditInstance,
    RewardLaw,
    posterior_sample,
    posterior_update,
    posterior_variance,
    select_action,
    step,
    ucb1_select,
)
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    RunRecord,
    SummaryStats,
    regret_bound_privacy,
    run_many,
    run_once,
    suboptimal_pull_inflation,
)
from .kernels import backend

__version__ = "0.1.0"

__all__ = [
    "AgentKind",
    "AgentSpec",
    "AgentState",
    "ArmPosterior",
    "AuditReport",
    "BanditInstance",
    "Branch",
    "CompositionInput",
    "ExperimentConfig",
    "ExperimentResult",
    "GaussianMechParams",
    "NeighborPair",
    "OutcomeHistogram",
    "PrivacyBudget",
    "RewardLaw",
    "RewardTape",
    "RunRecord",
    "StepPrivacy",
    "SummaryStats",
    "account_run",
    "asymptotic_budget",
    "audit_algorithm",
    "backend",
    "compose",
    "eps_step_closed_form",
    "estimate_epsilon",
    "gaussian_mech_check",
    "gaussian_mech_eps_min",
    "posterior_sample",
    "posterior_update",
    "posterior_variance",
    "regret_bound_privacy",
    "run_many",
    "run_on_tape",
    "run_once",
    "select_action",
    "sensitivity",
    "step",
    "suboptimal_pull_inflation",
    "ucb1_select",
]

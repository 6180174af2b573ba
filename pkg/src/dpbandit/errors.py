"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(ValueError):
    """A structurally invalid configuration (agent, experiment, or tape)."""


class EstimationError(RuntimeError):
    """An estimator was given degenerate inputs (e.g. an empty histogram)."""

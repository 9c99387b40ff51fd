"""Exception types shared across the package."""


class SwiptError(Exception):
    """Base class for all package-specific errors."""


class InfeasibleError(SwiptError):
    """No allocation satisfies the energy and power constraints.

    Raised instead of returning a best-effort point so that infeasible
    instances can never silently contaminate aggregated results.
    """

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class NumericalDomainError(SwiptError):
    """A closed-form branch was selected but its denominator underflowed."""


class ConfigError(SwiptError):
    """Invalid or inconsistent configuration input."""

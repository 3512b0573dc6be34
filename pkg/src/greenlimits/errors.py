"""Exception hierarchy shared by all modules."""


class GreenLimitsError(Exception):
    """Base class; ``exit_code`` is the CLI exit status for this failure."""

    exit_code = 4


class ConfigError(GreenLimitsError, ValueError):
    """Invalid configuration or parameters."""

    exit_code = 2


class DomainError(GreenLimitsError, ValueError):
    """Argument outside the mathematical domain of a formula."""

    exit_code = 2


class UndefinedEfficiencyError(GreenLimitsError, ZeroDivisionError):
    """Efficiency ratio with a zero-capacity denominator."""

    exit_code = 4


class InfeasibleError(GreenLimitsError):
    """No point of the search domain satisfies the constraint."""

    exit_code = 3

    def __init__(self, message, best_infeasible=None, constraint=None):
        super().__init__(message)
        self.best_infeasible = best_infeasible
        self.constraint = constraint


class NumericalError(GreenLimitsError):
    exit_code = 4

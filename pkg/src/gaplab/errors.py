"""Exception and warning types raised across gaplab."""


class GapLabError(Exception):
    """Base class for configuration and solver errors (CLI exit code 2)."""


class ConfigError(GapLabError, ValueError):
    pass


class NoConvergence(GapLabError):
    def __init__(self, message, residuals=None, iterations=None):
        super().__init__(message)
        self.residuals = residuals
        self.iterations = iterations


class NearDegenerateWarning(UserWarning):
    """lambda_2 - lambda_1 fell below 10 * tol; the result is still returned."""


class PositivityWarning(UserWarning):
    """The computed ground state is not strictly positive on every degree of freedom."""


class EmptyMask(GapLabError):
    pass


class ZeroDenominator(GapLabError, ZeroDivisionError):
    pass


class ExtrapolationUnstable(GapLabError):
    pass


class DomainError(GapLabError, ValueError):
    pass


class NotADisk(GapLabError, ValueError):
    pass


class HypothesisFailed(GapLabError):
    """A check's hypothesis does not hold for this run; the check is skipped, not failed."""

"""Exception and warning types shared across the package."""


class DBECError(Exception):
    """Base class for all package errors."""


class InvalidGrid(DBECError, ValueError):
    pass


class NonFiniteField(DBECError, FloatingPointError):
    pass


class InvalidScale(DBECError, ValueError):
    pass


class NotDefocusable(DBECError, ValueError):
    """Raised when B(u) >= 0, so no rescaling reaches Q = 0."""


class InvalidPhysical(DBECError, ValueError):
    pass


class NoDescentDirection(DBECError):
    """No iterate with negative interaction energy could be reached."""


class NotUnstableRegime(NoDescentDirection):
    """(lambda1, lambda2) lies outside the unstable regime.

    Subclasses NoDescentDirection: in the stable regime B >= 0 on every
    field, so the free solver has no admissible starting point.
    """


class MaxIterations(DBECError):
    """Solver hit its iteration cap. Carries the last iterate and report."""

    def __init__(self, message, field=None, report=None):
        super().__init__(message)
        self.field = field
        self.report = report


class BasinEscape(DBECError):
    """Trapped solver iterate left the kinetic basin A < 2k."""

    def __init__(self, message, field=None, report=None):
        super().__init__(message)
        self.field = field
        self.report = report


class InsufficientSamples(DBECError, ValueError):
    pass


class ConfigError(DBECError, ValueError):
    def __init__(self, key, reason):
        super().__init__(f"{key}: {reason}")
        self.key = key
        self.reason = reason


class FormatError(DBECError, ValueError):
    pass


class ResolutionLoss(UserWarning):
    """Soft warning: a rescaled field is no longer well represented on its grid."""


class IoError(DBECError, OSError):
    """File could not be read or written."""

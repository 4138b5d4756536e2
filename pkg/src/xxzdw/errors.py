"""Exception types shared across the package."""


class XXZDWError(Exception):
    """Base class for package errors."""


class ConvergenceError(XXZDWError):
    """A refinement loop hit its cap without meeting tolerance.

    Carries the last two estimates so callers can report how far apart
    they were.
    """

    def __init__(self, message, last=None, previous=None):
        super().__init__(message)
        self.last = last
        self.previous = previous


class PoleProximityError(XXZDWError):
    """An evaluation point sits on (or within 1e-14 of) a pole."""


class InvalidConfigError(XXZDWError):
    """Rejected input: bad parameter combination or malformed config."""


class VerificationError(XXZDWError):
    """An identity-verification suite found a violation."""

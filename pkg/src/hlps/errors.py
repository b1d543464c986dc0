"""Exception types raised across the package."""


class HlpsError(Exception):
    """Base class for all errors raised by hlps."""


class EmptyPointSet(HlpsError, ValueError):
    pass


class InsufficientPoints(HlpsError, ValueError):
    pass


class BadNoiseConfig(HlpsError, ValueError):
    pass


class NoParticipants(HlpsError, ValueError):
    pass


class DuplicateSender(HlpsError, ValueError):
    pass


class ReservedUserId(HlpsError, ValueError):
    """A user claimed the id reserved for the LBS provider."""


class QuNotInGroup(HlpsError, ValueError):
    pass


class NotAProbabilityVector(HlpsError, ValueError):
    pass


class BadAnonymitySetSize(HlpsError, ValueError):
    pass


class BadScenarioParams(HlpsError, ValueError):
    pass


class ConfigSyntax(HlpsError, ValueError):
    """Configuration text could not be parsed.

    ``lineno`` is 1-based, or None when the parser could not tell.
    """

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        where = f"line {lineno}: " if lineno is not None else ""
        super().__init__(f"{where}{message}")


class ConfigInvalid(HlpsError, ValueError):
    """Configuration parsed but violates a constraint on ``field``."""

    def __init__(self, field: str, message: str = ""):
        self.field = field
        super().__init__(f"{field}: {message}" if message else field)

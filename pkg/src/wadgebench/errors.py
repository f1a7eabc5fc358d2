"""Exception hierarchy shared by every module."""


class WadgeError(Exception):
    """Base class for all library errors."""


class RejectedInput(WadgeError, ValueError):
    """Malformed data (negative letter, empty period, bad parameter)."""


class PreconditionError(WadgeError):
    """An operation was called outside its documented domain."""


class ModeError(WadgeError):
    """Exact verification requested where only sampling is sound."""


class UnsupportedTier(WadgeError):
    """A game or exact check was requested on a symbolic (tier 2) set."""


class ExtractionError(WadgeError):
    """A strategy could not be turned into a transducer."""


class ConstructionError(WadgeError):
    """A family builder received ill-formed parameters."""


class InternalError(WadgeError):
    """An internal consistency check failed."""


class ParseError(WadgeError):
    def __init__(self, message, line=0, col=0, expected=()):
        self.line = line
        self.col = col
        self.expected = tuple(sorted(set(expected)))
        where = f"{line}:{col}: " if line else ""
        extra = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{where}{message}{extra}")

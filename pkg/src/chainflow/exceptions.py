"""Exception hierarchy shared by all chainflow modules."""


class ChainflowError(Exception):
    """Base class for every error raised by this package."""


class InstanceError(ChainflowError, ValueError):
    """An instance (or instance document) violates the data model.

    ``field`` names the offending part of the document, e.g. ``nodes[3].capacity``.
    """

    def __init__(self, field, message):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")


class InstanceParseError(InstanceError):
    """The serialized instance is not valid JSON or has the wrong shape."""


class GuardError(ChainflowError):
    """A size guard refused a computation that would not finish at desk scale."""

    guard = "guard"

    def __init__(self, message, size=None, limit=None):
        self.size = size
        self.limit = limit
        super().__init__(f"{self.guard}: {message}")


class EnumerationTooLarge(GuardError):
    guard = "enumeration-too-large"


class SearchSpaceTooLarge(GuardError):
    guard = "search-space-too-large"


class MismatchedInstanceError(ChainflowError):
    """Two results handed to the evaluator do not belong to the same instance."""

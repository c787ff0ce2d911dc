"""Exception hierarchy shared by the library and the CLI (exit codes 2 / 3)."""


class TracelabError(Exception):
    """Base class for all library errors."""


class ValidationError(TracelabError, ValueError):
    """A precondition on the inputs is violated."""


class DomainError(ValidationError):
    """An argument lies outside the domain of the operation (e.g. a zero divisor)."""


class CapacityError(TracelabError, RuntimeError):
    """The requested computation exceeds a configured size or memory budget."""

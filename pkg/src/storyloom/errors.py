"""Exception taxonomy shared across the library.

Every error raised by storyloom derives from StoryloomError and carries a
stable machine-readable ``code`` so the service and CLI can map failures
without string matching.
"""


class StoryloomError(Exception):
    """Base class for all storyloom errors."""

    code = "error"

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}


class ValidationFailure(StoryloomError):
    """A record or argument violates a structural invariant."""

    code = "validation"


class UnknownGenreError(StoryloomError):
    """A genre has no stored profile."""

    code = "unknown-genre"


class UnknownPatternError(StoryloomError):
    """Pattern id does not resolve to a builtin or stored pattern."""

    code = "unknown-pattern"


class NotFoundError(StoryloomError):
    """A store record id does not exist."""

    code = "not-found"


class StoreCorruptError(StoryloomError):
    """Index and files on disk disagree in a way that needs manual repair."""

    code = "store-corrupt"


class EmptyInputError(StoryloomError):
    """An operation that needs at least two inputs got fewer."""

    code = "empty-input"


class EmptyResultError(StoryloomError):
    """Generalization produced no stage supported by enough outlines."""

    code = "empty-result"


class ParseFailure(StoryloomError):
    """Model output did not match the expected layout."""

    code = "parse-failure"


class MissingSlotError(StoryloomError):
    """A template was rendered without bindings for all of its slots."""

    code = "missing-slot"


class FixtureMissError(StoryloomError):
    """Replay transport has no recorded response for a request fingerprint."""

    code = "fixture-miss"


class ProviderError(StoryloomError):
    """The completion provider returned a non-retryable failure."""

    code = "provider-error"


class RetriesExhaustedError(StoryloomError):
    """All retry attempts against the provider failed."""

    code = "retries-exhausted"


class InvalidStateError(StoryloomError):
    """A session operation was attempted in the wrong state."""

    code = "invalid-state"


class InvalidPremiseError(StoryloomError):
    """Premise text is empty or too long."""

    code = "invalid-premise"


class RevisionLimitError(StoryloomError):
    """A stage has hit the regeneration cap."""

    code = "revision-limit"


class LengthViolationError(StoryloomError):
    """Generated text failed its length contract even after a retry."""

    code = "length-violation"

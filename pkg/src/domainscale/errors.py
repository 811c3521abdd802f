"""Exception hierarchy shared by all pipeline stages.

Every error raised on bad user input derives from :class:`DomainScaleError`,
so the CLI can map it to exit code 2 and emit a machine-readable error record.
"""


class DomainScaleError(Exception):
    """Base class for all errors caused by invalid input or requests."""


class CorpusParseError(DomainScaleError):
    """A corpus file could not be parsed (carries the offending line number)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(DomainScaleError):
    """An invariant on the input data is violated (duplicates, overlaps...)."""


class UnknownKeyError(DomainScaleError):
    """A party, code, domain or id was requested that does not exist."""


class EmbeddingFormatError(DomainScaleError):
    """An embedding file violates the EMB1 contract."""


class MissingEmbeddingError(DomainScaleError):
    """A sentence participating in a distance computation has no vector."""


class InsufficientDataError(DomainScaleError):
    """Too few items to perform the requested computation."""


class DimensionMismatchError(DomainScaleError):
    """Vector or matrix shapes are incompatible."""


class TrainingError(DomainScaleError):
    """The labeller cannot be trained on the given instances."""


class UndefinedResultError(DomainScaleError):
    """The requested statistic is undefined for this input.

    Covers zero-variance correlations, empty evaluation sets, distances of
    zero vectors and matrices with undefined (NA) entries.
    """


class ConfigError(DomainScaleError):
    """The run configuration is incomplete or references missing files."""

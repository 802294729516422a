"""Exception hierarchy shared across the package."""

from __future__ import annotations


class DistillError(Exception):
    """Base class for all package errors."""


# --- corpus store ---------------------------------------------------------


class DuplicatePaperError(DistillError):
    """An id that must be unique appeared twice."""


class UnknownPaperError(DistillError):
    """An operation referenced an id not present in the corpus."""


class CorePaperError(DistillError):
    """An operation attempted to remove a core (hop-0) paper."""


class EmptyCoreError(DistillError):
    """A core set must contain at least one paper."""


class EmptyJournalError(DistillError):
    """Undo was requested on a session with no journal entries."""


class InvalidRecordError(DistillError):
    """A paper record violated a structural invariant."""


# --- project files --------------------------------------------------------


class ProjectFormatError(DistillError):
    """A project file could not be read at all."""


class UnsupportedVersionError(ProjectFormatError):
    """The project file was written by an unknown format version."""


class ChecksumError(ProjectFormatError):
    """Stored integrity checksum does not match the file contents."""


# --- citation network -----------------------------------------------------


class FetchError(DistillError):
    """Base class for metadata-retrieval failures."""


class InvalidIdError(FetchError):
    """The id is syntactically invalid; no request was attempted."""


class NotFoundError(FetchError):
    """The upstream service does not know the id."""


class RateLimitedError(FetchError):
    """The upstream service asked us to back off."""

    def __init__(self, message: str, retry_after: float | None = None):
        super().__init__(message)
        self.retry_after = retry_after


class NetworkError(FetchError):
    """Transport-level failure (connect, timeout, ...)."""


class MalformedResponseError(FetchError):
    """The upstream response could not be parsed."""


# --- embeddings and geometry ----------------------------------------------


class ProviderError(DistillError):
    """An embedding provider failed or returned bad data."""


class DimensionMismatchError(DistillError):
    """Vectors of incompatible dimension were combined."""


class ZeroVectorError(DistillError):
    """A zero-norm embedding where a direction is required."""

    def __init__(self, message: str, ids: list[str] | None = None):
        super().__init__(message)
        self.ids = ids or []


# --- text pipeline / topic model -------------------------------------------


class VocabularyError(DistillError):
    """Vocabulary construction produced no usable tokens."""


class FactorizationError(DistillError):
    """Invalid input to the matrix factorization."""


# --- service layer ---------------------------------------------------------


class GeometryError(DistillError):
    """A selection geometry is degenerate or self-intersecting."""


class StaleLayoutError(DistillError):
    """The 2-D layout predates the last corpus mutation; re-project first."""


class EmptySelectionError(DistillError):
    """The operation requires a nonempty selection."""


class JobActiveError(DistillError):
    """A mutation was attempted while a background job is running."""

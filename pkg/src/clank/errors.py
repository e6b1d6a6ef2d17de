"""Exception types shared across the toolkit.

Every failure the public API can signal subclasses :class:`ClankError`, so
callers (and the CLI) can separate bad input from genuine bugs. ``kind``
gives the short machine-readable name used in structured diagnostics.
"""

from __future__ import annotations


class ClankError(Exception):
    """Base class for all toolkit errors."""

    @property
    def kind(self) -> str:
        name = type(self).__name__
        return name[:-5] if name.endswith("Error") else name


class LineTaggedError(ClankError):
    """Parse-time error that remembers which input line it came from."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


# sound library

class MissingFileError(ClankError):
    """A manifest or a file it references does not exist."""


class SchemaViolationError(LineTaggedError):
    """Input does not match the documented JSON/JSONL/binary schema."""


class SampleRateMismatchError(ClankError):
    """A library clip is not recorded at the required 48 kHz."""


class DuplicateKeyError(ClankError):
    """Two library entries share a clip id or an index triple."""


class EmptyClipError(ClankError):
    """A referenced audio file holds zero samples."""


class UnknownMaterialPairError(ClankError):
    """No library clips exist for the queried material pair."""


class UnknownInteractionTypeError(ClankError):
    """The material pair exists but not with the queried interaction."""


# collision events

class NegativeQuantityError(LineTaggedError):
    """An event field that must be positive (or non-negative) is not."""


class EventPastEpisodeEndError(LineTaggedError):
    """An event interval extends beyond the episode duration."""


# rendering

class NonPositiveForceError(ClankError):
    """Force values fed to the gain law must be strictly positive."""


class NonPositiveSizeError(ClankError):
    """Size values fed to the pitch law must be strictly positive."""


class TargetShorterThanCrossfadeError(ClankError):
    """Duration fitting cannot target less than one crossfade length."""


class UnresolvableEventError(ClankError):
    """An event's key has no clip in the library and skipping is off."""


# spectral front-end

class InputTooShortError(ClankError):
    """Signal shorter than one analysis window."""


# fusion

class DimMismatchError(ClankError):
    """Feature widths disagree where they must match."""


class ShapeMismatchError(ClankError):
    """Row/column counts disagree where they must match."""


# evaluation

class NonPositiveTargetError(LineTaggedError):
    """Task targets must be strictly positive."""


class EmptyInputError(ClankError):
    """Aggregation over zero episodes is undefined."""

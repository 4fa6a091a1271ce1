"""Exception types shared across the engine."""

from __future__ import annotations


class EdictError(Exception):
    """Base class for all engine errors."""


class BoundsError(EdictError):
    """An offset or span falls outside the document."""


class ParseError(EdictError):
    """Program source is malformed. Carries the character position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class ResolutionError(EdictError):
    """A required target matched nothing. Carries the constraint source."""

    def __init__(self, constraint: str):
        super().__init__(f"no match for constraint {constraint}")
        self.constraint = constraint


class ExecutionError(EdictError):
    """A program step could not be applied to the current document."""


class StaleEventError(EdictError):
    """An ASR event arrived for an utterance that was already finalized."""


class TokenAlignmentError(EdictError):
    """Event token texts or timestamps are inconsistent with the event text."""


class PartitionError(EdictError):
    """A segment list does not form a valid labeled partition."""


class SchemaError(EdictError):
    """A trajectory file is malformed. Carries the offending field path."""

    def __init__(self, message: str, path: str):
        super().__init__(f"{message} (field {path})")
        self.path = path


class ChainError(EdictError):
    """Recorded gold states do not chain from one segment to the next."""


class ReplayMismatch(EdictError):
    """Replay produced a state that differs from the recorded gold state.

    Carries the index of the first divergent segment plus both states.
    """

    def __init__(self, segment_index: int, expected, actual):
        super().__init__(
            f"segment {segment_index}: expected {expected!r}, got {actual!r}"
        )
        self.segment_index = segment_index
        self.expected = expected
        self.actual = actual


class StageError(EdictError):
    """A pipeline stage failed; the pipeline degrades but records this."""


class TransportError(StageError):
    """The external completion endpoint could not be reached."""


class CompletionTimeout(StageError):
    """The external completion endpoint did not answer in time."""


class CompletionFormatError(StageError):
    """The external completion could not be parsed into a result."""

"""Interactive dictation engine.

A single speech stream mixes verbatim dictation with spoken editing commands.
This package aggregates streaming recognizer events, splits the stream into
dictation and command segments, interprets commands in a small text-editing
language, and maintains the resulting document with commit points, plus the
trajectory tooling (record, replay, evaluate) and a session service around it.
"""

from .document import (
    DocumentState,
    EditScript,
    Span,
    apply_span_edit,
    diff,
    diff_text,
    insert_dictation,
    state_match,
)
from .asr import AsrEvent, Token, Transcript, current_transcript, ingest, split_by_time
from .dsl import (
    ResolutionContext,
    execute,
    parse_program,
    print_canonical,
    program_match,
    resolve,
    resolve_target,
)

__version__ = "0.1.0"

__all__ = [
    "DocumentState",
    "EditScript",
    "Span",
    "apply_span_edit",
    "diff",
    "diff_text",
    "insert_dictation",
    "state_match",
    "AsrEvent",
    "Token",
    "Transcript",
    "current_transcript",
    "ingest",
    "split_by_time",
    "ResolutionContext",
    "execute",
    "parse_program",
    "print_canonical",
    "program_match",
    "resolve",
    "resolve_target",
    "__version__",
]

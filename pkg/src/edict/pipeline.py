"""Incremental dictation pipeline.

Events fold into a frozen committed prefix plus a mutable suffix. Every event
rebuilds the suffix interpretation from the committed state (partials can
rewrite anything not yet committed), with per-stage caching so unchanged
segments cost nothing. Finals advance a commit policy that bounds how many
utterances stay open: confident prefixes freeze immediately, and after four
open finals the best-scoring boundary freezes by force.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

from .asr import AsrEvent, PlacedToken, Transcript, current_transcript, ingest
from .document import DocumentState, insert_dictation
from .dsl.ast import Program
from .dsl.execute import execute
from .dsl.parser import parse_program, print_canonical
from .errors import EdictError, StageError
from .interpret import template_interpret
from .segmentation import (
    COMMAND,
    DICTATION,
    Segment,
    TagResult,
    baseline_tag,
    decode_tags,
    segment_token_text,
)

COMMIT_THRESHOLD = math.log(0.5)
COMMIT_HORIZON = 4

# Stage signatures. The normalizer sees the pre-state for context and the
# segment's start time for alignment against stored gold labels; both return
# a value plus a log-probability style confidence.
Normalizer = Callable[[DocumentState, str, int], tuple[str, float]]
Interpreter = Callable[[DocumentState, str, int], tuple[Program, float]]
Tagger = Callable[[Sequence[PlacedToken]], TagResult]


def identity_normalize(
    d_pre: DocumentState, text: str, start_ms: int = 0
) -> tuple[str, float]:
    return text, 0.0


def default_interpret(
    d_pre: DocumentState, text: str, start_ms: int = 0
) -> tuple[Program, float]:
    return template_interpret(text)


def dictation_insert_text(d_pre: DocumentState, text: str) -> str:
    """Add the separating space the speaker never says out loud."""
    at = d_pre.selected_span.start
    if (
        at > 0
        and text
        and not text[0].isspace()
        and not d_pre.content[at - 1].isspace()
    ):
        return " " + text
    return text


@dataclass(frozen=True)
class SegmentRecord:
    """One folded segment: what it said, what it did, how sure we are."""

    index: int
    kind: str
    token_start: int
    token_end: int
    start_ms: int
    end_ms: int
    text: str
    pre_state: DocumentState
    post_state: DocumentState
    tag_logprob: float
    normalized: Optional[str] = None
    norm_logprob: float = 0.0
    program: Optional[str] = None
    interp_logprob: float = 0.0
    error: Optional[str] = None
    overridden: bool = False

    @property
    def confidence(self) -> float:
        if self.kind == DICTATION:
            return self.tag_logprob
        return self.tag_logprob + self.norm_logprob + self.interp_logprob

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "kind": self.kind,
            "token_start": self.token_start,
            "token_end": self.token_end,
            "start_ms": self.start_ms,
            "end_ms": self.end_ms,
            "text": self.text,
            "pre_state": self.pre_state.to_json(),
            "post_state": self.post_state.to_json(),
            "tag_logprob": self.tag_logprob,
            "normalized": self.normalized,
            "norm_logprob": self.norm_logprob,
            "program": self.program,
            "interp_logprob": self.interp_logprob,
            "error": self.error,
            "overridden": self.overridden,
            "confidence": self.confidence,
        }


@dataclass(frozen=True)
class PipelineView:
    """What a caller sees after one event."""

    visible_state: DocumentState
    committed_state: DocumentState
    transcript_text: str
    records: tuple[SegmentRecord, ...]
    confidence: float
    committed_now: bool
    finals_open: int


@dataclass
class _Boundary:
    """A possible commit point: the world just after one final."""

    state: DocumentState
    confidence: float
    n_events: int


class Pipeline:
    def __init__(
        self,
        initial_state: DocumentState | None = None,
        *,
        tagger: Tagger = baseline_tag,
        normalizer: Normalizer = identity_normalize,
        interpreter: Interpreter = default_interpret,
        commit_threshold: float = COMMIT_THRESHOLD,
        commit_horizon: int = COMMIT_HORIZON,
        commits_enabled: bool = True,
        state_overrides: dict[str, DocumentState] | None = None,
    ):
        self.committed_state = initial_state or DocumentState()
        self.tagger = tagger
        self.normalizer = normalizer
        self.interpreter = interpreter
        self.commit_threshold = commit_threshold
        self.commit_horizon = commit_horizon
        self.commits_enabled = commits_enabled
        # Hand-assigned post states, keyed by segment start in ms. A matching
        # command segment takes the stored state instead of executing; the
        # annotator's word beats the interpreter's.
        self.state_overrides = dict(state_overrides or {})
        self.events: list[AsrEvent] = []
        self.transcript = Transcript()
        self.boundaries: deque[_Boundary] = deque(maxlen=commit_horizon)
        self.finals_since_commit = 0
        self.records: tuple[SegmentRecord, ...] = ()
        self.visible_state = self.committed_state
        self.confidence = 0.0
        self._cache: dict[tuple, tuple] = {}

    # -- stages with caching and degradation ------------------------------

    def _cached(self, label: str, pre: DocumentState, text: str, start_ms: int, fn):
        key = (label, pre.content, pre.selection, text, start_ms)
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    def _normalize(self, pre: DocumentState, text: str, start_ms: int):
        def run():
            try:
                return (*self.normalizer(pre, text, start_ms), None)
            except StageError as err:
                return text, 0.0, str(err)

        return self._cached("normalize", pre, text, start_ms, run)

    def _interpret(self, pre: DocumentState, text: str, start_ms: int):
        def run():
            try:
                program, logprob = self.interpreter(pre, text, start_ms)
                return print_canonical(program), logprob, None
            except StageError as err:
                return None, 0.0, str(err)

        return self._cached("interpret", pre, text, start_ms, run)

    # -- folding ----------------------------------------------------------

    def _fold_segment(
        self,
        index: int,
        segment: Segment,
        tokens: Sequence[PlacedToken],
        tag_result: TagResult,
        pre: DocumentState,
    ) -> SegmentRecord:
        text = segment_token_text(tokens, segment)
        toks = tokens[segment.start : segment.end]
        tag_lp = sum(tag_result.logprobs[segment.start : segment.end])
        base = dict(
            index=index,
            kind=segment.kind,
            token_start=segment.start,
            token_end=segment.end,
            start_ms=toks[0].start_ms,
            end_ms=toks[-1].end_ms,
            text=text,
            pre_state=pre,
            tag_logprob=tag_lp,
        )
        if segment.kind == DICTATION:
            # Commands leave their edit highlighted; continued speech must
            # not overtype that highlight, so collapse to the focus first.
            anchored = replace(pre, selection=(pre.focus, pre.focus))
            post = insert_dictation(
                anchored, dictation_insert_text(anchored, text)
            )
            return SegmentRecord(post_state=post, **base)
        start_ms = toks[0].start_ms
        normalized, norm_lp, norm_err = self._normalize(pre, text, start_ms)
        override = self.state_overrides.get(str(start_ms))
        if override is not None:
            return SegmentRecord(
                post_state=override,
                normalized=normalized,
                norm_logprob=norm_lp,
                overridden=True,
                **base,
            )
        program, interp_lp, interp_err = self._interpret(pre, normalized, start_ms)
        error = norm_err or interp_err
        post = pre
        if program is not None and error is None:
            try:
                post = execute(parse_program(program), pre)
            except EdictError as err:
                error = str(err)
                post = pre
        return SegmentRecord(
            post_state=post,
            normalized=normalized,
            norm_logprob=norm_lp,
            program=program,
            interp_logprob=interp_lp,
            error=error,
            **base,
        )

    def _refold(self):
        snapshot = current_transcript(self.transcript)
        tokens = snapshot.tokens
        if not tokens:
            self.records = ()
            self.visible_state = self.committed_state
            self.confidence = 0.0
            return
        tag_result = self.tagger(tokens)
        segments = decode_tags(list(tag_result.tags))
        records = []
        state = self.committed_state
        for i, segment in enumerate(segments):
            record = self._fold_segment(i, segment, tokens, tag_result, state)
            records.append(record)
            state = record.post_state
        self.records = tuple(records)
        self.visible_state = state
        self.confidence = sum(r.confidence for r in records)

    # -- commit policy ----------------------------------------------------

    def _commit_at(self, boundary: _Boundary):
        remaining = self.events[boundary.n_events :]
        self.committed_state = boundary.state
        self.events = []
        self.transcript = Transcript()
        self.boundaries.clear()
        self.finals_since_commit = 0
        self._cache.clear()
        for event in remaining:
            self._absorb(event)
        self._refold()

    def _absorb(self, event: AsrEvent):
        self.transcript = ingest(self.transcript, event)
        self.events.append(event)
        if event.kind == "final":
            self._refold()
            self.finals_since_commit += 1
            self.boundaries.append(
                _Boundary(self.visible_state, self.confidence, len(self.events))
            )

    def on_event(self, event: AsrEvent) -> PipelineView:
        self._absorb(event)
        committed_now = False
        if event.kind == "final" and self.commits_enabled:
            if self.confidence > self.commit_threshold:
                self._commit_at(self.boundaries[-1])
                committed_now = True
            elif self.finals_since_commit > self.commit_horizon:
                best = max(
                    enumerate(self.boundaries),
                    key=lambda pair: (pair[1].confidence, pair[0]),
                )[1]
                self._commit_at(best)
                committed_now = True
        self._refold()
        return PipelineView(
            visible_state=self.visible_state,
            committed_state=self.committed_state,
            transcript_text=current_transcript(self.transcript).text,
            records=self.records,
            confidence=self.confidence,
            committed_now=committed_now,
            finals_open=self.finals_since_commit,
        )

"""Streaming speech-recognizer events and their aggregation into a transcript.

A recognizer emits a sequence of events per utterance: any number of partial
hypotheses, then exactly one final result. The transcript at any instant is
every final result so far plus at most one live partial.
"""

from __future__ import annotations

import json
from bisect import bisect_left
from dataclasses import dataclass, field

from .errors import StaleEventError, TokenAlignmentError

PARTIAL = "partial"
FINAL = "final"


@dataclass(frozen=True)
class Token:
    """One recognized word with its utterance-relative time span in ms."""

    text: str
    start_ms: int
    end_ms: int

    @property
    def midpoint_x2(self) -> int:
        # Doubled midpoint, so comparisons against ms boundaries stay integral.
        return self.start_ms + self.end_ms

    def to_json(self) -> dict:
        return {"text": self.text, "start_ms": self.start_ms, "end_ms": self.end_ms}

    @classmethod
    def from_json(cls, obj: dict) -> "Token":
        return cls(obj["text"], int(obj["start_ms"]), int(obj["end_ms"]))


@dataclass(frozen=True)
class AsrEvent:
    """One hypothesis from the recognizer.

    kind is "partial" or "final"; n_best carries alternate hypotheses and is
    only meaningful on finals. Token times are non-decreasing and the token
    texts joined with single spaces must reproduce the event text.
    """

    kind: str
    utterance_id: int
    text: str
    tokens: tuple[Token, ...] = ()
    n_best: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in (PARTIAL, FINAL):
            raise ValueError(f"unknown event kind {self.kind!r}")
        if self.kind == PARTIAL and self.n_best:
            raise ValueError("n_best is only carried by final events")
        last = None
        for tok in self.tokens:
            if tok.end_ms < tok.start_ms:
                raise TokenAlignmentError(f"token {tok.text!r} ends before it starts")
            if last is not None and tok.start_ms < last.start_ms:
                raise TokenAlignmentError("token start times must be non-decreasing")
            last = tok
        if self.tokens:
            joined = " ".join(tok.text for tok in self.tokens)
            if joined != self.text:
                raise TokenAlignmentError(
                    f"tokens {joined!r} do not spell event text {self.text!r}"
                )

    def to_json(self) -> dict:
        obj = {
            "kind": self.kind,
            "utterance_id": self.utterance_id,
            "text": self.text,
            "tokens": [tok.to_json() for tok in self.tokens],
        }
        if self.kind == FINAL:
            obj["n_best"] = list(self.n_best)
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "AsrEvent":
        return cls(
            kind=obj["kind"],
            utterance_id=int(obj["utterance_id"]),
            text=obj["text"],
            tokens=tuple(Token.from_json(t) for t in obj.get("tokens", [])),
            n_best=tuple(obj.get("n_best", [])),
        )


def synthesize_tokens(text: str, start_ms: int, end_ms: int) -> tuple[Token, ...]:
    """Evenly spaced tokens for a text whose recognizer gave no word timing."""
    words = text.split()
    if not words:
        return ()
    step = max((end_ms - start_ms) // len(words), 1)
    tokens = []
    at = start_ms
    for i, word in enumerate(words):
        stop = end_ms if i == len(words) - 1 else at + step
        tokens.append(Token(word, at, stop))
        at = stop
    return tuple(tokens)


@dataclass(frozen=True)
class PlacedToken:
    """A token situated in the aggregate transcript: char span plus source."""

    text: str
    start_ms: int
    end_ms: int
    char_start: int
    char_end: int
    final_index: int | None  # index into finals, or None for the live partial

    @property
    def midpoint_x2(self) -> int:
        return self.start_ms + self.end_ms


@dataclass(frozen=True)
class TranscriptSnapshot:
    """The aggregate text at one instant, with every token placed in it."""

    text: str
    tokens: tuple[PlacedToken, ...]
    # Token counts at which each final result ends, in order.
    final_boundaries: tuple[int, ...]


@dataclass(frozen=True)
class Transcript:
    """All finalized results plus at most one live partial."""

    finals: tuple[AsrEvent, ...] = ()
    live_partial: AsrEvent | None = None

    @property
    def last_final_id(self) -> int | None:
        return self.finals[-1].utterance_id if self.finals else None


def ingest(t: Transcript, e: AsrEvent) -> Transcript:
    """Fold one event into the transcript.

    Later events supersede the live partial. Any event for an utterance at or
    before the last finalized one is stale and rejected.
    """
    last = t.last_final_id
    if last is not None and e.utterance_id <= last:
        raise StaleEventError(
            f"utterance {e.utterance_id} already finalized (last final {last})"
        )
    if t.live_partial is not None and e.utterance_id < t.live_partial.utterance_id:
        raise StaleEventError(
            f"utterance {e.utterance_id} superseded by live partial "
            f"{t.live_partial.utterance_id}"
        )
    if e.kind == PARTIAL:
        return Transcript(t.finals, e)
    return Transcript(t.finals + (e,), None)


def current_transcript(t: Transcript) -> TranscriptSnapshot:
    """Finals joined with single spaces, then the live partial."""
    pieces: list[tuple[AsrEvent, int | None]] = [
        (e, i) for i, e in enumerate(t.finals)
    ]
    if t.live_partial is not None:
        pieces.append((t.live_partial, None))

    parts: list[str] = []
    placed: list[PlacedToken] = []
    boundaries: list[int] = []
    cursor = 0
    for event, final_index in pieces:
        if not event.text:
            if final_index is not None:
                boundaries.append(len(placed))
            continue
        if parts:
            cursor += 1  # the single joining space
        parts.append(event.text)
        offset = cursor
        for tok in event.tokens:
            start = event.text.find(tok.text, offset - cursor) + cursor
            placed.append(
                PlacedToken(
                    text=tok.text,
                    start_ms=tok.start_ms,
                    end_ms=tok.end_ms,
                    char_start=start,
                    char_end=start + len(tok.text),
                    final_index=final_index,
                )
            )
            offset = start + len(tok.text)
        cursor += len(event.text)
        if final_index is not None:
            boundaries.append(len(placed))
    return TranscriptSnapshot(" ".join(parts), tuple(placed), tuple(boundaries))


def split_by_time(t: Transcript, boundaries_ms: list[int]) -> list[str]:
    """Partition the current transcript text at the given instants.

    Each token joins the segment whose time range holds its midpoint; a
    midpoint exactly on a boundary goes left. Empty trailing segments are
    dropped, interior empties are kept so indices line up with boundaries.
    """
    snapshot = current_transcript(t)
    doubled = [2 * b for b in sorted(boundaries_ms)]
    buckets: list[list[str]] = [[] for _ in range(len(doubled) + 1)]
    for tok in snapshot.tokens:
        buckets[bisect_left(doubled, tok.midpoint_x2)].append(tok.text)
    segments = [" ".join(bucket) for bucket in buckets]
    while segments and not segments[-1]:
        segments.pop()
    return segments


def read_event_log(path: str) -> list[AsrEvent]:
    """Load a JSONL event log, one event object per line."""
    events = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                events.append(AsrEvent.from_json(json.loads(line)))
    return events


def write_event_log(path: str, events: list[AsrEvent]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for event in events:
            fh.write(json.dumps(event.to_json(), ensure_ascii=False) + "\n")

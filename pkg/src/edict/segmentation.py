"""Token-level segmentation of a transcript into dictation and command spans.

Tokens carry one of five tags. O marks dictation; B/I/E bracket a multi-token
command and S is a single-token command. Runs of O collapse into one dictation
segment, so a valid segment list never holds two adjacent dictations, while
command segments may touch.
"""

from __future__ import annotations

import json
import math
import subprocess
from dataclasses import dataclass
from typing import Iterable, Sequence

from .asr import PlacedToken
from .errors import PartitionError, StageError

TAGS = ("B", "I", "E", "S", "O")

DICTATION = "dictation"
COMMAND = "command"

# Leading verbs that usually open a spoken editing command.
TRIGGER_WORDS = frozenset(
    {
        "capitalize", "lowercase", "uppercase", "delete", "remove", "erase",
        "insert", "replace", "move", "spell", "respell", "quote",
        "parenthesize", "combine", "correct", "correction", "select",
        "highlight", "undo", "scratch", "change", "make", "put", "join",
    }
)

_HEURISTIC_CONFIDENCE = math.log(0.9)
_PRE_TRIGGER_CONFIDENCE = math.log(0.5)


@dataclass(frozen=True, order=True)
class Segment:
    """A labeled run of tokens, indices half-open."""

    kind: str
    start: int
    end: int

    def __post_init__(self):
        if self.kind not in (DICTATION, COMMAND):
            raise PartitionError(f"unknown segment kind {self.kind!r}")
        if not 0 <= self.start < self.end:
            raise PartitionError(
                f"bad token range [{self.start}, {self.end})"
            )

    def to_json(self) -> dict:
        return {"kind": self.kind, "start": self.start, "end": self.end}

    @classmethod
    def from_json(cls, obj: dict) -> "Segment":
        return cls(obj["kind"], obj["start"], obj["end"])


def decode_tags(tags: Sequence[str]) -> list[Segment]:
    """Turn a valid tag sequence into segments; malformed input raises."""
    segments: list[Segment] = []
    open_start: int | None = None  # start of a B...E command being read
    run_start: int | None = None  # start of the current O run
    for i, tag in enumerate(tags):
        if tag not in TAGS:
            raise PartitionError(f"unknown tag {tag!r} at {i}")
        if tag == "I" or tag == "E":
            if open_start is None:
                raise PartitionError(f"{tag} at {i} without an open command")
            if tag == "E":
                segments.append(Segment(COMMAND, open_start, i + 1))
                open_start = None
            continue
        if open_start is not None:
            raise PartitionError(f"command opened at {open_start} never closed")
        if tag == "O":
            if run_start is None:
                run_start = i
            continue
        if run_start is not None:
            segments.append(Segment(DICTATION, run_start, i))
            run_start = None
        if tag == "S":
            segments.append(Segment(COMMAND, i, i + 1))
        else:  # B
            open_start = i
    if open_start is not None:
        raise PartitionError(f"command opened at {open_start} never closed")
    if run_start is not None:
        segments.append(Segment(DICTATION, run_start, len(tags)))
    return segments


def encode_tags(segments: Sequence[Segment], n_tokens: int) -> list[str]:
    """Inverse of decode_tags; rejects gaps, overlaps, adjacent dictations."""
    tags: list[str] = []
    previous: Segment | None = None
    for seg in segments:
        if seg.start != len(tags):
            raise PartitionError(
                f"segment starts at {seg.start}, expected {len(tags)}"
            )
        if previous and previous.kind == DICTATION and seg.kind == DICTATION:
            raise PartitionError("adjacent dictation segments must be merged")
        if seg.kind == DICTATION:
            tags.extend("O" * (seg.end - seg.start))
        elif seg.end - seg.start == 1:
            tags.append("S")
        else:
            tags.extend(["B"] + ["I"] * (seg.end - seg.start - 2) + ["E"])
        previous = seg
    if len(tags) != n_tokens:
        raise PartitionError(f"segments cover {len(tags)} of {n_tokens} tokens")
    return tags


def repair_tags(tags: Sequence[str]) -> list[str]:
    """Coerce an arbitrary tag sequence into a valid one.

    An unclosed command keeps its span: a lone B becomes S, otherwise its last
    token becomes E. An I with no opener degrades to dictation; an E with no
    opener becomes a one-token command.
    """
    out: list[str] = []
    open_at: int | None = None

    def close_open():
        nonlocal open_at
        if open_at is None:
            return
        if len(out) - 1 == open_at:
            out[open_at] = "S"
        else:
            out[-1] = "E"
        open_at = None

    for tag in tags:
        if tag == "B":
            close_open()
            open_at = len(out)
            out.append("B")
        elif tag == "I":
            out.append("I" if open_at is not None else "O")
        elif tag == "E":
            if open_at is None:
                out.append("S")
            else:
                out.append("E")
                open_at = None
        elif tag == "S":
            close_open()
            out.append("S")
        elif tag == "O":
            close_open()
            out.append("O")
        else:
            close_open()
            out.append("O")
    close_open()
    return out


def is_valid_tags(tags: Sequence[str]) -> bool:
    try:
        decode_tags(tags)
    except PartitionError:
        return False
    return True


def gold_tags_from_keys(
    tokens: Sequence[PlacedToken],
    key_intervals: Sequence[tuple[int, int]],
) -> list[str]:
    """Derive command tags from push-to-command key holds.

    A token belongs to a hold when its temporal midpoint lies inside
    (down, up]: a word whose midpoint coincides with the press instant is
    still dictation, one ending exactly at release is command. Each hold
    yields its own command segment.
    """
    assignment: list[int | None] = []
    for tok in tokens:
        hit = None
        for k, (down, up) in enumerate(key_intervals):
            if 2 * down < tok.midpoint_x2 <= 2 * up:
                hit = k
                break
        assignment.append(hit)
    segments: list[Segment] = []
    i = 0
    while i < len(assignment):
        j = i
        while j < len(assignment) and assignment[j] == assignment[i]:
            j += 1
        kind = DICTATION if assignment[i] is None else COMMAND
        if segments and segments[-1].kind == DICTATION and kind == DICTATION:
            segments[-1] = Segment(DICTATION, segments[-1].start, j)
        else:
            segments.append(Segment(kind, i, j))
        i = j
    return encode_tags(segments, len(tokens))


@dataclass(frozen=True)
class TagResult:
    """Tags plus one log-probability per token."""

    tags: tuple[str, ...]
    logprobs: tuple[float, ...]

    def __post_init__(self):
        if len(self.tags) != len(self.logprobs):
            raise PartitionError("tags and logprobs must align")


def baseline_tag(tokens: Sequence[PlacedToken]) -> TagResult:
    """Keyword heuristic: a trigger word starts a command that runs to the
    end of its recognizer final.

    Every decided tag carries log 0.9 confidence, except dictation tokens
    sitting ahead of a trigger inside the same final, which are genuinely
    ambiguous and carry log 0.5.
    """
    n = len(tokens)
    tags = ["O"] * n
    logprobs = [_HEURISTIC_CONFIDENCE] * n
    # final_index of None (live partial) groups as its own trailing final.
    by_final: dict[object, list[int]] = {}
    for i, tok in enumerate(tokens):
        by_final.setdefault(tok.final_index, []).append(i)
    for indices in by_final.values():
        trigger_at = None
        for i in indices:
            word = tokens[i].text.strip(".,!?;:").lower()
            if word in TRIGGER_WORDS:
                trigger_at = i
                break
        if trigger_at is None:
            continue
        last = indices[-1]
        if trigger_at == last:
            tags[trigger_at] = "S"
        else:
            tags[trigger_at] = "B"
            for i in range(trigger_at + 1, last):
                tags[i] = "I"
            tags[last] = "E"
        for i in indices:
            if i < trigger_at:
                logprobs[i] = _PRE_TRIGGER_CONFIDENCE
    repaired = repair_tags(tags)
    return TagResult(tuple(repaired), tuple(logprobs))


@dataclass(frozen=True)
class SegMetrics:
    exact_match: bool
    precision: float
    recall: float
    f1: float

    def to_json(self) -> dict:
        return {
            "exact_match": self.exact_match,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


def seg_metrics(
    predicted: Sequence[Segment], gold: Sequence[Segment]
) -> SegMetrics:
    """Exact match plus labeled-segment precision/recall/F1."""
    gold_set = set(gold)
    correct = sum(1 for seg in predicted if seg in gold_set)
    precision = correct / len(predicted) if predicted else 0.0
    recall = correct / len(gold) if gold else 0.0
    f1 = (
        2 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    return SegMetrics(list(predicted) == list(gold), precision, recall, f1)


def segment_token_text(tokens: Sequence[PlacedToken], segment: Segment) -> str:
    """The segment's surface text, spaced as spoken."""
    return " ".join(t.text for t in tokens[segment.start : segment.end])


class SubprocessTagger:
    """Line-protocol bridge to an external tagging process.

    One JSON object per request line, one per response:
      -> {"tokens": [{"text", "start_ms", "end_ms", "final_index"}, ...]}
      <- {"tags": [...], "logprobs": [...]}
    """

    def __init__(self, command: Sequence[str]):
        self.command = list(command)
        self._proc: subprocess.Popen | None = None

    def _ensure(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
            )
        return self._proc

    def tag(self, tokens: Sequence[PlacedToken]) -> TagResult:
        request = {
            "tokens": [
                {
                    "text": t.text,
                    "start_ms": t.start_ms,
                    "end_ms": t.end_ms,
                    "final_index": t.final_index,
                }
                for t in tokens
            ]
        }
        proc = self._ensure()
        try:
            assert proc.stdin and proc.stdout
            proc.stdin.write(json.dumps(request) + "\n")
            proc.stdin.flush()
            line = proc.stdout.readline()
        except (BrokenPipeError, OSError) as err:
            raise StageError(f"tagger process failed: {err}") from err
        if not line:
            raise StageError("tagger process closed its output")
        try:
            payload = json.loads(line)
            tags = repair_tags(payload["tags"])
            logprobs = [float(x) for x in payload["logprobs"]]
        except (ValueError, KeyError, TypeError) as err:
            raise StageError(f"bad tagger response: {err}") from err
        if len(tags) != len(tokens) or len(logprobs) != len(tokens):
            raise StageError("tagger response length mismatch")
        return TagResult(tuple(tags), tuple(logprobs))

    def close(self):
        if self._proc is not None:
            if self._proc.stdin:
                self._proc.stdin.close()
            self._proc.terminate()
            self._proc.wait(timeout=5)
            self._proc = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

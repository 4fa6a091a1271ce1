"""Recorded annotation sessions: schema, replay, and evaluation.

A trajectory is everything needed to reproduce one session: the starting
document, the raw event stream, the key holds marking commands, and sparse
gold labels. Segment-level labels key on the segment's start time in
milliseconds, which survives re-segmentation of unrelated parts of the
stream; per-event segmentations key on the event's index.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field, replace as dc_replace
from typing import Callable, Optional, Sequence

from .asr import AsrEvent, current_transcript
from .document import DocumentState, insert_dictation, state_match
from .dsl.execute import execute
from .dsl.parser import parse_program, print_canonical
from .errors import ReplayMismatch, SchemaError
from .interpret import template_interpret
from .pipeline import (
    Interpreter,
    Normalizer,
    Pipeline,
    SegmentRecord,
    default_interpret,
    dictation_insert_text,
    identity_normalize,
)
from .segmentation import (
    COMMAND,
    DICTATION,
    Segment,
    TagResult,
    encode_tags,
    gold_tags_from_keys,
)

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
WINDOW_SIZES = (1, 2, 3, 4)


@dataclass(frozen=True)
class Trajectory:
    task: str
    initial_state: DocumentState
    events: tuple[AsrEvent, ...]
    key_intervals: tuple[tuple[int, int], ...] = ()
    gold_segments: dict[str, tuple[Segment, ...]] = field(default_factory=dict)
    gold_normalizations: dict[str, str] = field(default_factory=dict)
    gold_programs: dict[str, str] = field(default_factory=dict)
    gold_states: dict[str, DocumentState] = field(default_factory=dict)
    notes: str = ""

    def to_json(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "task": self.task,
            "initial_state": self.initial_state.to_json(),
            "events": [e.to_json() for e in self.events],
            "key_intervals": [list(iv) for iv in self.key_intervals],
            "gold_segments": {
                k: [s.to_json() for s in v]
                for k, v in sorted(self.gold_segments.items())
            },
            "gold_normalizations": dict(sorted(self.gold_normalizations.items())),
            "gold_programs": dict(sorted(self.gold_programs.items())),
            "gold_states": {
                k: v.to_json() for k, v in sorted(self.gold_states.items())
            },
            "notes": self.notes,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Trajectory":
        validate_trajectory(obj)
        return cls(
            task=obj["task"],
            initial_state=DocumentState.from_json(obj["initial_state"]),
            events=tuple(AsrEvent.from_json(e) for e in obj["events"]),
            key_intervals=tuple(
                (int(a), int(b)) for a, b in obj.get("key_intervals", [])
            ),
            gold_segments={
                k: tuple(Segment.from_json(s) for s in v)
                for k, v in obj.get("gold_segments", {}).items()
            },
            gold_normalizations=dict(obj.get("gold_normalizations", {})),
            gold_programs=dict(obj.get("gold_programs", {})),
            gold_states={
                k: DocumentState.from_json(v)
                for k, v in obj.get("gold_states", {}).items()
            },
            notes=obj.get("notes", ""),
        )


def validate_trajectory(obj: dict) -> None:
    """Structural validation with a path in every complaint."""

    def need(cond, path, msg):
        if not cond:
            raise SchemaError(msg, path)

    need(isinstance(obj, dict), "$", "trajectory must be an object")
    need(
        obj.get("format_version") == FORMAT_VERSION,
        "$.format_version",
        f"format_version must be {FORMAT_VERSION}",
    )
    need(isinstance(obj.get("task"), str), "$.task", "task must be a string")
    need(
        isinstance(obj.get("initial_state"), dict),
        "$.initial_state",
        "initial_state must be an object",
    )
    events = obj.get("events")
    need(isinstance(events, list), "$.events", "events must be a list")
    n_events = len(events)
    for i, e in enumerate(events):
        need(isinstance(e, dict), f"$.events[{i}]", "event must be an object")
        try:
            AsrEvent.from_json(e)
        except Exception as err:
            raise SchemaError(str(err), f"$.events[{i}]") from err
    for i, iv in enumerate(obj.get("key_intervals", [])):
        path = f"$.key_intervals[{i}]"
        need(
            isinstance(iv, (list, tuple)) and len(iv) == 2,
            path,
            "key interval must be a [down, up] pair",
        )
        down, up = iv
        need(
            isinstance(down, int) and isinstance(up, int) and down < up,
            path,
            "key interval must satisfy down < up",
        )
    for key, segs in obj.get("gold_segments", {}).items():
        path = f"$.gold_segments[{key!r}]"
        need(
            key.isdigit() and int(key) < n_events,
            path,
            "key must be the index of an event",
        )
        need(isinstance(segs, list), path, "value must be a segment list")
        for j, seg in enumerate(segs):
            try:
                Segment.from_json(seg)
            except Exception as err:
                raise SchemaError(str(err), f"{path}[{j}]") from err
    for table in ("gold_normalizations", "gold_programs"):
        for key, value in obj.get(table, {}).items():
            path = f"$.{table}[{key!r}]"
            need(key.lstrip("-").isdigit(), path, "key must be a start time in ms")
            need(isinstance(value, str), path, "value must be a string")
            if table == "gold_programs":
                try:
                    parse_program(value)
                except Exception as err:
                    raise SchemaError(
                        f"program does not parse: {err}", path
                    ) from err
    for key, value in obj.get("gold_states", {}).items():
        path = f"$.gold_states[{key!r}]"
        need(key.lstrip("-").isdigit(), path, "key must be a start time in ms")
        try:
            DocumentState.from_json(value)
        except Exception as err:
            raise SchemaError(str(err), path) from err


def load_trajectory(path: str) -> Trajectory:
    with open(path, "r", encoding="utf-8") as fh:
        return Trajectory.from_json(json.load(fh))


def save_trajectory(path: str, trajectory: Trajectory) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(trajectory.to_json(), fh, ensure_ascii=False, indent=2)
        fh.write("\n")


def derive_partial_golds(
    source: Trajectory, target: Trajectory
) -> Trajectory:
    """Carry normalizations from one recording onto a related one.

    Only normalizations move: they depend on the utterance alone, so a
    matching start time is enough. States and programs depend on surrounding
    context and must be re-annotated, never copied.
    """
    target_starts = {
        str(r.start_ms)
        for r in gold_records(target)
        if r.kind == COMMAND
    }
    copied = dict(target.gold_normalizations)
    for key, value in source.gold_normalizations.items():
        if key in target_starts:
            copied.setdefault(key, value)
        else:
            log.warning(
                "normalization at %sms has no matching segment; dropped", key
            )
    return dc_replace(target, gold_normalizations=copied)


# -- gold-stage pipeline construction -------------------------------------


class GoldTagger:
    """Segment lookup: explicit per-event gold first, key holds otherwise.

    Gold tags are certain, so every token carries log-probability zero.
    """

    def __init__(self, trajectory: Trajectory):
        self.trajectory = trajectory
        self.version = 0

    def set_version(self, index: int) -> None:
        self.version = index

    def __call__(self, tokens) -> TagResult:
        override = self.trajectory.gold_segments.get(str(self.version))
        if override is not None:
            segments = list(override)
            # Under live commits the pipeline re-tags only the open suffix,
            # but stored segments index the whole stream. Re-base them by
            # the consumed prefix so both spellings of "gold" agree.
            covered = segments[-1].end if segments else 0
            offset = covered - len(tokens)
            if offset > 0:
                segments = [
                    Segment(s.kind, max(s.start - offset, 0), s.end - offset)
                    for s in segments
                    if s.end > offset
                ]
            tags = encode_tags(segments, len(tokens))
        else:
            tags = gold_tags_from_keys(tokens, self.trajectory.key_intervals)
        return TagResult(tuple(tags), tuple(0.0 for _ in tokens))


def gold_normalizer(trajectory: Trajectory) -> Normalizer:
    def normalize(d_pre, text, start_ms=0):
        return trajectory.gold_normalizations.get(str(start_ms), text), 0.0

    return normalize


def gold_interpreter(trajectory: Trajectory) -> Interpreter:
    def interpret(d_pre, text, start_ms=0):
        gold = trajectory.gold_programs.get(str(start_ms))
        if gold is not None:
            return parse_program(gold), 0.0
        return template_interpret(text)

    return interpret


def gold_pipeline(trajectory: Trajectory) -> tuple[Pipeline, GoldTagger]:
    # A stored state with no program alongside it is a hand assignment: there
    # is nothing to execute, the state itself is the label. With a program
    # present the state is redundant and replay treats it as an assertion.
    overrides = {
        k: v
        for k, v in trajectory.gold_states.items()
        if k not in trajectory.gold_programs
    }
    tagger = GoldTagger(trajectory)
    pipeline = Pipeline(
        trajectory.initial_state,
        tagger=tagger,
        normalizer=gold_normalizer(trajectory),
        interpreter=gold_interpreter(trajectory),
        commits_enabled=False,
        state_overrides=overrides,
    )
    return pipeline, tagger


def gold_records(trajectory: Trajectory) -> tuple[SegmentRecord, ...]:
    """Fold the whole stream under gold stages; no checking."""
    pipeline, tagger = gold_pipeline(trajectory)
    for i, event in enumerate(trajectory.events):
        tagger.set_version(i)
        view = pipeline.on_event(event)
    return view.records if trajectory.events else ()


def replay_gold(trajectory: Trajectory) -> tuple[SegmentRecord, ...]:
    """Reproduce the session under gold stages and audit every segment.

    Commits stay off so the final fold covers the full stream. Each segment's
    recorded post-state is checked: dictations against a fresh splice,
    commands against a fresh execution of their program, and any segment with
    a stored gold state against that state. The first divergence raises.
    """
    records = gold_records(trajectory)
    for r in records:
        if r.error is not None:
            raise ReplayMismatch(r.index, "clean execution", r.error)
        if r.kind == DICTATION:
            anchored = dc_replace(
                r.pre_state, selection=(r.pre_state.focus, r.pre_state.focus)
            )
            again = insert_dictation(
                anchored, dictation_insert_text(anchored, r.text)
            )
        elif r.overridden:
            again = r.post_state  # hand-assigned, nothing to re-derive
        else:
            again = execute(parse_program(r.program), r.pre_state)
        if again != r.post_state:
            raise ReplayMismatch(r.index, repr(again), repr(r.post_state))
        gold_state = trajectory.gold_states.get(str(r.start_ms))
        if gold_state is not None and not state_match(gold_state, r.post_state):
            raise ReplayMismatch(
                r.index, repr(gold_state.content), repr(r.post_state.content)
            )
    return records


# -- evaluation ------------------------------------------------------------


@dataclass
class _MetricPool:
    total: float = 0.0
    count: int = 0

    def add(self, value: float) -> None:
        self.total += value
        self.count += 1

    @property
    def mean(self) -> Optional[float]:
        return self.total / self.count if self.count else None


def _edit_similarity(a: str, b: str) -> float:
    from .dsl.units import levenshtein

    if not a and not b:
        return 1.0
    return 1.0 - levenshtein(a, b) / max(len(a), len(b))


@dataclass
class EvalReport:
    pooled: dict
    by_window_size: dict
    rows: list[dict]

    def to_json(self) -> dict:
        return {
            "pooled": self.pooled,
            "by_window_size": self.by_window_size,
            "n_windows": len(self.rows),
        }

    def to_csv(self) -> str:
        buffer = io.StringIO()
        fields = [
            "example", "window_start", "window_size",
            "state_em", "edit_sim", "program_em", "norm_em",
        ]
        writer = csv.DictWriter(buffer, fieldnames=fields)
        writer.writeheader()
        for row in self.rows:
            writer.writerow({k: row.get(k, "") for k in fields})
        return buffer.getvalue()


def evaluate(
    trajectories: Sequence[tuple[str, Trajectory]],
    *,
    normalizer: Normalizer = identity_normalize,
    interpreter: Interpreter = default_interpret,
    window_sizes: Sequence[int] = WINDOW_SIZES,
) -> EvalReport:
    """Windowed re-prediction over gold segment chains.

    Every run of up to four consecutive gold segments becomes one case: start
    from the gold state before the window, re-run each segment with the
    configured stages chained on their own predictions, and compare the
    window's end against gold. Dictation splices are deterministic, so
    single-segment dictation windows measure the harness itself.
    """
    pools: dict[str, dict[str, _MetricPool]] = {}
    rows: list[dict] = []

    def pool(scope: str) -> dict[str, _MetricPool]:
        return pools.setdefault(
            scope,
            {k: _MetricPool() for k in ("state_em", "edit_sim", "program_em", "norm_em")},
        )

    for example_id, trajectory in trajectories:
        records = replay_gold(trajectory)
        n = len(records)
        for size in window_sizes:
            for start in range(0, n - size + 1):
                window = records[start : start + size]
                state = window[0].pre_state
                program_hits: list[float] = []
                norm_hits: list[float] = []
                for r in window:
                    if r.kind == DICTATION:
                        anchored = dc_replace(
                            state, selection=(state.focus, state.focus)
                        )
                        state = insert_dictation(
                            anchored, dictation_insert_text(anchored, r.text)
                        )
                        continue
                    predicted_norm, _ = normalizer(state, r.text, r.start_ms)
                    norm_hits.append(
                        1.0 if predicted_norm == (r.normalized or r.text) else 0.0
                    )
                    try:
                        program, _ = interpreter(state, predicted_norm, r.start_ms)
                        canonical = print_canonical(program)
                    except Exception:
                        program, canonical = None, None
                    if r.program is not None:
                        program_hits.append(
                            1.0 if canonical == r.program else 0.0
                        )
                    if program is not None:
                        try:
                            state = execute(program, state)
                        except Exception:
                            pass
                gold_end = window[-1].post_state
                row = {
                    "example": example_id,
                    "window_start": start,
                    "window_size": size,
                    "state_em": 1.0 if state.content == gold_end.content else 0.0,
                    "edit_sim": _edit_similarity(state.content, gold_end.content),
                }
                if program_hits:
                    row["program_em"] = min(program_hits)
                if norm_hits:
                    row["norm_em"] = min(norm_hits)
                rows.append(row)
                for scope in ("pooled", f"window_{size}", f"example_{example_id}"):
                    p = pool(scope)
                    p["state_em"].add(row["state_em"])
                    p["edit_sim"].add(row["edit_sim"])
                    if "program_em" in row:
                        p["program_em"].add(row["program_em"])
                    if "norm_em" in row:
                        p["norm_em"].add(row["norm_em"])

    def render(scope: str) -> dict:
        return {
            name: metric.mean
            for name, metric in pools.get(scope, {}).items()
            if metric.count
        }

    by_size = {
        size: render(f"window_{size}")
        for size in window_sizes
        if f"window_{size}" in pools
    }
    return EvalReport(pooled=render("pooled"), by_window_size=by_size, rows=rows)


# -- corpus statistics -----------------------------------------------------


def corpus_stats(trajectories: Sequence[tuple[str, Trajectory]]) -> dict:
    """Counts in the usual corpus-table shape."""
    out = {
        "examples": 0,
        "events": 0,
        "finals": 0,
        "segments": 0,
        "dictation_segments": 0,
        "command_segments": 0,
        "tokens": 0,
        "gold_programs": 0,
        "gold_normalizations": 0,
        "mean_tokens_per_segment": 0.0,
        "commands_per_example": 0.0,
    }
    for _, trajectory in trajectories:
        out["examples"] += 1
        out["events"] += len(trajectory.events)
        out["finals"] += sum(1 for e in trajectory.events if e.kind == "final")
        records = gold_records(trajectory)
        out["segments"] += len(records)
        for r in records:
            if r.kind == DICTATION:
                out["dictation_segments"] += 1
            else:
                out["command_segments"] += 1
            out["tokens"] += r.token_end - r.token_start
        out["gold_programs"] += len(trajectory.gold_programs)
        out["gold_normalizations"] += len(trajectory.gold_normalizations)
    if out["segments"]:
        out["mean_tokens_per_segment"] = round(
            out["tokens"] / out["segments"], 2
        )
    if out["examples"]:
        out["commands_per_example"] = round(
            out["command_segments"] / out["examples"], 2
        )
    return out

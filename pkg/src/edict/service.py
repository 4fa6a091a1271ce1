"""Annotation service: a live session over a websocket plus trajectory storage.

One session mirrors one recording pass. The client streams recognizer events
and key holds exactly as a real capture would, watches the folded document
after every message, and patches gold labels where the automatic stages got
it wrong. Submit persists a trajectory that replays cleanly or not at all.
"""

from __future__ import annotations

import json
import re
from dataclasses import replace as dc_replace
from importlib import resources
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse

from .asr import AsrEvent
from .document import DocumentState, diff
from .errors import EdictError, SchemaError
from .segmentation import COMMAND, DICTATION, Segment
from .trajectory import (
    Trajectory,
    gold_records,
    replay_gold,
    save_trajectory,
    validate_trajectory,
)

_NAME_RE = re.compile(r"[A-Za-z0-9][A-Za-z0-9_.-]{0,79}")


def _clip_events(
    events: list[AsrEvent], cut_ms: int
) -> list[AsrEvent]:
    """Drop everything spoken at or after cut_ms.

    An event straddling the cut is replaced by a same-kind event holding only
    the surviving tokens, so the stream stays well formed.
    """
    kept: list[AsrEvent] = []
    for e in events:
        if not e.tokens:
            raise ValueError("cannot truncate a stream with untimed events")
        surviving = tuple(t for t in e.tokens if t.end_ms <= cut_ms)
        if len(surviving) == len(e.tokens):
            kept.append(e)
        elif surviving:
            kept.append(
                AsrEvent(
                    e.kind,
                    e.utterance_id,
                    " ".join(t.text for t in surviving),
                    surviving,
                )
            )
    return kept


class AnnotationSession:
    """Message-driven session core; the websocket layer is a thin shell."""

    def __init__(
        self,
        store_dir: str | Path,
        task: str = "",
        initial_content: str = "",
        target_content: str = "",
    ):
        self.store_dir = Path(store_dir)
        self.seq = 0
        self._start(task, initial_content, target_content)

    def _start(
        self, task: str, initial_content: str, target_content: str = ""
    ) -> None:
        self.task = task
        self.target = target_content
        n = len(initial_content)
        self.initial_state = DocumentState(initial_content, (n, n))
        self.events: list[AsrEvent] = []
        self.intervals: list[tuple[int, int]] = []
        self.open_hold: Optional[int] = None
        self.norm_overrides: dict[str, str] = {}
        self.state_overrides: dict[str, DocumentState] = {}

    # -- folding -----------------------------------------------------------

    def _working_trajectory(self) -> Trajectory:
        return Trajectory(
            task=self.task,
            initial_state=self.initial_state,
            events=tuple(self.events),
            key_intervals=tuple(self.intervals),
            gold_normalizations=dict(self.norm_overrides),
            gold_states=dict(self.state_overrides),
        )

    def _records(self):
        if not self.events:
            return ()
        return gold_records(self._working_trajectory())

    def _flags(self, records) -> list[dict]:
        flags = []
        for r in records:
            if r.kind != COMMAND:
                continue
            if r.error is not None:
                flags.append(
                    {
                        "segment": r.index,
                        "code": "stage-error",
                        "message": r.error,
                    }
                )
            elif not r.overridden and r.post_state == r.pre_state:
                flags.append(
                    {
                        "segment": r.index,
                        "code": "no-op",
                        "message": "command changed nothing; fix its gold"
                        " utterance or assign the resulting state",
                    }
                )
        return flags

    def snapshot(self) -> dict:
        records = self._records()
        flags = self._flags(records)
        visible = records[-1].post_state if records else self.initial_state
        transcript = ""
        if records:
            # final fold sees the full stream; its tokens span the transcript
            transcript = " ".join(r.text for r in records)
        self.seq += 1
        # Diffs are computed here and nowhere else; clients render these
        # scripts verbatim instead of re-deriving them.
        return {
            "type": "snapshot",
            "seq": self.seq,
            "task": self.task,
            "initial_state": self.initial_state.to_json(),
            "n_events": len(self.events),
            "transcript": transcript,
            "visible_state": visible.to_json(),
            "diff": diff(self.initial_state, visible).to_json(),
            "target": self.target,
            # what remains to reach the target; null for free-form prompts
            "target_diff": (
                diff(visible, DocumentState(self.target)).to_json()
                if self.target
                else None
            ),
            "segments": [
                {
                    **r.to_json(),
                    "diff": diff(r.pre_state, r.post_state).to_json(),
                    "flags": [f for f in flags if f["segment"] == r.index],
                }
                for r in records
            ],
            "flags": flags,
            "can_submit": bool(records) and not flags,
            "open_hold": self.open_hold,
        }

    def _error(self, message: str) -> dict:
        self.seq += 1
        return {"type": "error", "seq": self.seq, "message": message}

    def _record_at(self, start_ms: int):
        for r in self._records():
            if r.start_ms == start_ms:
                return r
        return None

    # -- message handling --------------------------------------------------

    def handle(self, msg: dict) -> dict:
        if not isinstance(msg, dict) or "type" not in msg:
            return self._error("message must be an object with a type")
        kind = msg["type"]
        handler = getattr(self, f"_on_{kind}", None)
        if handler is None:
            return self._error(f"unknown message type {kind!r}")
        try:
            return handler(msg)
        except (EdictError, ValueError, KeyError, TypeError) as err:
            return self._error(str(err))

    def _on_sync(self, msg: dict) -> dict:
        # Reconnecting clients ask for the current view instead of keeping
        # any state of their own.
        return self.snapshot()

    def _on_asr_event(self, msg: dict) -> dict:
        event = AsrEvent.from_json(msg["event"])
        self.events.append(event)
        return self.snapshot()

    def _on_key_down(self, msg: dict) -> dict:
        if self.open_hold is not None:
            return self._error("command key is already down")
        self.open_hold = int(msg["t_ms"])
        return self.snapshot()

    def _on_key_up(self, msg: dict) -> dict:
        if self.open_hold is None:
            return self._error("command key is not down")
        t = int(msg["t_ms"])
        if t <= self.open_hold:
            return self._error("key release must come after the press")
        self.intervals.append((self.open_hold, t))
        self.open_hold = None
        return self.snapshot()

    def _on_set_gold_normalization(self, msg: dict) -> dict:
        start_ms = int(msg["start_ms"])
        record = self._record_at(start_ms)
        if record is None:
            return self._error(f"no segment starts at {start_ms}ms")
        if record.kind == DICTATION:
            return self._error("dictation segments are never normalized")
        self.norm_overrides[str(start_ms)] = str(msg["text"])
        return self.snapshot()

    def _on_set_post_state(self, msg: dict) -> dict:
        start_ms = int(msg["start_ms"])
        record = self._record_at(start_ms)
        if record is None:
            return self._error(f"no segment starts at {start_ms}ms")
        if record.kind == DICTATION:
            return self._error(
                "dictation states are derived from the stream; edit the"
                " events or a command instead"
            )
        content = str(msg["content"])
        n = len(content)
        self.state_overrides[str(start_ms)] = DocumentState(content, (n, n))
        # Later commands were annotated against a world that no longer
        # exists; their hand-assigned states go back to derived. Gold
        # utterances depend only on the audio and survive.
        for k in [k for k in self.state_overrides if int(k) > start_ms]:
            del self.state_overrides[k]
        return self.snapshot()

    def _on_truncate_from(self, msg: dict) -> dict:
        cut_ms = int(msg["start_ms"])
        self.events = _clip_events(self.events, cut_ms)
        # A hold survives only if it still covers some remaining speech.
        midpoints = [
            t.start_ms + t.end_ms for e in self.events for t in e.tokens
        ]
        self.intervals = [
            (down, min(up, cut_ms))
            for down, up in self.intervals
            if down < min(up, cut_ms)
            and any(2 * down < m <= 2 * min(up, cut_ms) for m in midpoints)
        ]
        if self.open_hold is not None and self.open_hold >= cut_ms:
            self.open_hold = None
        for table in (self.norm_overrides, self.state_overrides):
            for key in [k for k in table if int(k) >= cut_ms]:
                del table[key]
        return self.snapshot()

    def _on_reset(self, msg: dict) -> dict:
        self._start(
            str(msg.get("task", self.task)),
            str(msg.get("initial_content", "")),
            str(msg.get("target_content", self.target)),
        )
        return self.snapshot()

    def _on_submit(self, msg: dict) -> dict:
        name = str(msg.get("name", ""))
        if not _NAME_RE.fullmatch(name):
            return self._error("submit needs a plain filename (letters,"
                              " digits, dot, dash, underscore)")
        records = self._records()
        if not records:
            return self._error("nothing to submit")
        flags = self._flags(records)
        if flags:
            return self._error(
                f"{len(flags)} unresolved flag(s); fix them before submitting"
            )
        trajectory = self._final_trajectory(records)
        validate_trajectory(trajectory.to_json())
        replay_gold(trajectory)  # refuse to persist anything that won't replay
        self.store_dir.mkdir(parents=True, exist_ok=True)
        path = self.store_dir / f"{name}.json"
        save_trajectory(str(path), trajectory)
        self.seq += 1
        return {
            "type": "submitted",
            "seq": self.seq,
            "name": name,
            "path": str(path),
            "segments": len(records),
        }

    def _final_trajectory(self, records) -> Trajectory:
        segments = tuple(
            Segment(r.kind, r.token_start, r.token_end) for r in records
        )
        gold_programs = {
            str(r.start_ms): r.program
            for r in records
            if r.kind == COMMAND and not r.overridden and r.program is not None
        }
        gold_states = {str(r.start_ms): r.post_state for r in records}
        working = self._working_trajectory()
        return dc_replace(
            working,
            gold_segments={str(len(self.events) - 1): segments},
            gold_programs=gold_programs,
            gold_states=gold_states,
        )


# -- HTTP application -------------------------------------------------------


def load_prompts() -> list[dict]:
    raw = resources.files("edict").joinpath("data/prompts.json").read_text()
    return json.loads(raw)


def create_app(store_dir: str | Path = "trajectories") -> FastAPI:
    app = FastAPI(title="edict annotation service")
    app.state.store_dir = Path(store_dir)
    app.state.sessions: dict[str, AnnotationSession] = {}

    @app.get("/prompts")
    def prompts():
        return load_prompts()

    @app.get("/trajectories")
    def list_trajectories():
        out = []
        store = app.state.store_dir
        if store.is_dir():
            for path in sorted(store.glob("*.json")):
                try:
                    obj = json.loads(path.read_text())
                    out.append(
                        {
                            "name": path.stem,
                            "task": obj.get("task", ""),
                            "n_events": len(obj.get("events", [])),
                        }
                    )
                except (OSError, ValueError):
                    out.append({"name": path.stem, "error": "unreadable"})
        return out

    @app.get("/trajectories/{name}")
    def get_trajectory(name: str):
        if not _NAME_RE.fullmatch(name):
            return JSONResponse({"error": "bad name"}, status_code=400)
        path = app.state.store_dir / f"{name}.json"
        if not path.is_file():
            return JSONResponse({"error": "not found"}, status_code=404)
        return json.loads(path.read_text())

    @app.put("/trajectories/{name}")
    def put_trajectory(name: str, body: dict):
        if not _NAME_RE.fullmatch(name):
            return JSONResponse({"error": "bad name"}, status_code=400)
        try:
            validate_trajectory(body)
        except SchemaError as err:
            return JSONResponse(
                {"error": str(err), "path": err.path}, status_code=400
            )
        app.state.store_dir.mkdir(parents=True, exist_ok=True)
        path = app.state.store_dir / f"{name}.json"
        path.write_text(json.dumps(body, ensure_ascii=False, indent=2) + "\n")
        return {"saved": name}

    @app.websocket("/session/{session_id}")
    async def session_socket(websocket: WebSocket, session_id: str):
        await websocket.accept()
        session = app.state.sessions.setdefault(
            session_id, AnnotationSession(app.state.store_dir)
        )
        try:
            while True:
                msg = await websocket.receive_json()
                await websocket.send_json(session.handle(msg))
        except WebSocketDisconnect:
            pass

    return app

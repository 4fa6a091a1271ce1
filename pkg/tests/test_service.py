"""Annotation session behaviour and the HTTP surface around it."""

import json

import pytest
from fastapi.testclient import TestClient

from edict.asr import AsrEvent, Token
from edict.service import AnnotationSession, _clip_events, create_app
from edict.trajectory import load_trajectory, replay_gold


def words(t0, step, *texts):
    return tuple(
        Token(w, t0 + i * step, t0 + (i + 1) * step) for i, w in enumerate(texts)
    )


def final(uid, text, tokens):
    return AsrEvent("final", uid, text, tokens)


U1 = final(1, "Let's meet at 1pm", (
    Token("Let's", 0, 500), Token("meet", 500, 900),
    Token("at", 900, 1100), Token("1pm", 1100, 1600),
))
U2 = final(2, "at 2pm", (Token("at", 2000, 2200), Token("2pm", 2200, 2700)))


@pytest.fixture()
def session(tmp_path):
    return AnnotationSession(tmp_path, task="meeting note")


def feed_meeting(session):
    """Dictation, then a held-key correction. Returns the last snapshot."""
    session.handle({"type": "asr_event", "event": U1.to_json()})
    session.handle({"type": "key_down", "t_ms": 1900})
    session.handle({"type": "asr_event", "event": U2.to_json()})
    return session.handle({"type": "key_up", "t_ms": 2750})


class TestSessionFlow:
    def test_empty_snapshot(self, session):
        snap = session.handle({"type": "reset"})
        assert snap["type"] == "snapshot"
        assert snap["segments"] == []
        assert snap["can_submit"] is False

    def test_dictation_then_command(self, session):
        snap = feed_meeting(session)
        kinds = [s["kind"] for s in snap["segments"]]
        assert kinds == ["dictation", "command"]
        assert snap["segments"][1]["program"] == '(correction "at 2pm")'
        assert snap["visible_state"]["content"] == "Let's meet at 2pm"
        assert snap["can_submit"] is True

    def test_seq_is_monotone(self, session):
        seqs = [
            session.handle({"type": "reset"})["seq"],
            session.handle({"type": "nonsense"})["seq"],
            session.handle({"type": "reset"})["seq"],
        ]
        assert seqs == sorted(seqs) and len(set(seqs)) == 3

    def test_unknown_type_is_an_error(self, session):
        reply = session.handle({"type": "warp"})
        assert reply["type"] == "error"

    def test_key_pairing_rules(self, session):
        assert session.handle({"type": "key_up", "t_ms": 5})["type"] == "error"
        session.handle({"type": "key_down", "t_ms": 10})
        assert session.handle({"type": "key_down", "t_ms": 20})["type"] == "error"
        assert session.handle({"type": "key_up", "t_ms": 10})["type"] == "error"
        assert session.handle({"type": "key_up", "t_ms": 30})["type"] == "snapshot"

    def test_gold_utterance_edit_reinterprets(self, tmp_path):
        # A cursor command that lands where the cursor already is gets
        # flagged; fixing the gold utterance clears it.
        session = AnnotationSession(tmp_path, initial_content="abc")
        ev = final(1, "go to the end", words(0, 100, "go", "to", "the", "end"))
        session.handle({"type": "key_down", "t_ms": 0})
        session.handle({"type": "asr_event", "event": ev.to_json()})
        snap = session.handle({"type": "key_up", "t_ms": 500})
        assert snap["flags"] and snap["flags"][0]["code"] == "no-op"
        assert snap["can_submit"] is False
        snap = session.handle(
            {"type": "set_gold_normalization", "start_ms": 0,
             "text": "go to the start"}
        )
        assert snap["flags"] == []
        assert snap["segments"][0]["post_state"]["selection"] == [0, 0]
        assert snap["can_submit"] is True

    def test_dictations_are_never_normalized(self, session):
        feed_meeting(session)
        reply = session.handle(
            {"type": "set_gold_normalization", "start_ms": 0, "text": "x"}
        )
        assert reply["type"] == "error"
        assert "never normalized" in reply["message"]

    def test_post_state_edit_forces_and_propagates(self, session):
        feed_meeting(session)
        # a second dictation continues after the command
        u3 = final(3, "see you then", words(3000, 200, "see", "you", "then"))
        session.handle({"type": "asr_event", "event": u3.to_json()})
        snap = session.handle(
            {"type": "set_post_state", "start_ms": 2000,
             "content": "Let's meet at 2:00pm"}
        )
        seg1 = snap["segments"][1]
        assert seg1["overridden"] is True
        assert seg1["post_state"]["content"] == "Let's meet at 2:00pm"
        assert snap["visible_state"]["content"] == (
            "Let's meet at 2:00pm see you then"
        )

    def test_post_state_edit_rejected_for_dictation(self, session):
        feed_meeting(session)
        reply = session.handle(
            {"type": "set_post_state", "start_ms": 0, "content": "nope"}
        )
        assert reply["type"] == "error"

    def test_upstream_edit_drops_downstream_state_overrides(self, tmp_path):
        session = AnnotationSession(tmp_path)
        session.handle({"type": "asr_event", "event": U1.to_json()})
        session.handle({"type": "key_down", "t_ms": 1900})
        session.handle({"type": "asr_event", "event": U2.to_json()})
        session.handle({"type": "key_up", "t_ms": 2750})
        ev = final(3, "insert a period at the end",
                   words(3000, 100, "insert", "a", "period", "at", "the", "end"))
        session.handle({"type": "key_down", "t_ms": 2950})
        session.handle({"type": "asr_event", "event": ev.to_json()})
        session.handle({"type": "key_up", "t_ms": 3650})
        session.handle(
            {"type": "set_post_state", "start_ms": 3000, "content": "custom."}
        )
        assert "3000" in session.state_overrides
        snap = session.handle(
            {"type": "set_post_state", "start_ms": 2000,
             "content": "Let's meet at 14:00"}
        )
        assert "3000" not in session.state_overrides
        # downstream command re-derives against the new upstream state
        assert snap["segments"][2]["post_state"]["content"] == (
            "Let's meet at 14:00."
        )

    def test_snapshot_carries_server_side_diffs(self, session):
        from edict.document import EditScript

        snap = feed_meeting(session)
        assert snap["initial_state"] == {"content": "", "selection": [0, 0]}
        top = EditScript.from_json(snap["diff"])
        assert top.apply("") == snap["visible_state"]["content"]
        for seg in snap["segments"]:
            script = EditScript.from_json(seg["diff"])
            assert script.apply(seg["pre_state"]["content"]) == (
                seg["post_state"]["content"]
            )
        # the command replaced one word, so its script is surgical
        kinds = [k for op in snap["segments"][1]["diff"] for k in op]
        assert "retain" in kinds and "insert" in kinds

    def test_target_diff_tracks_remaining_work(self, tmp_path):
        from edict.document import EditScript

        session = AnnotationSession(
            tmp_path, initial_content="", target_content="Let's meet at 2pm"
        )
        snap = session.handle({"type": "asr_event", "event": U1.to_json()})
        assert snap["target"] == "Let's meet at 2pm"
        script = EditScript.from_json(snap["target_diff"])
        assert script.apply(snap["visible_state"]["content"]) == snap["target"]
        session.handle({"type": "key_down", "t_ms": 1900})
        session.handle({"type": "asr_event", "event": U2.to_json()})
        snap = session.handle({"type": "key_up", "t_ms": 2750})
        # document now matches the target: nothing left to add or delete
        assert snap["target_diff"] == [{"retain": 17}]

    def test_target_survives_bare_reset(self, tmp_path):
        session = AnnotationSession(tmp_path, target_content="goal")
        snap = session.handle({"type": "reset"})
        assert snap["target"] == "goal"
        snap = session.handle({"type": "reset", "target_content": ""})
        assert snap["target"] == ""
        assert snap["target_diff"] is None

    def test_sync_returns_a_snapshot(self, session):
        before = feed_meeting(session)
        snap = session.handle({"type": "sync"})
        assert snap["type"] == "snapshot"
        assert snap["seq"] == before["seq"] + 1
        assert snap["segments"] == before["segments"]
        assert snap["visible_state"] == before["visible_state"]

    def test_truncate_from_drops_suffix(self, session):
        feed_meeting(session)
        snap = session.handle({"type": "truncate_from", "start_ms": 2000})
        assert [s["kind"] for s in snap["segments"]] == ["dictation"]
        assert snap["visible_state"]["content"] == "Let's meet at 1pm"
        assert session.intervals == []

    def test_reset_clears_everything(self, session):
        feed_meeting(session)
        snap = session.handle(
            {"type": "reset", "task": "other", "initial_content": "seed"}
        )
        assert snap["segments"] == []
        assert snap["task"] == "other"
        assert snap["visible_state"]["content"] == "seed"


class TestSubmit:
    def test_submit_persists_replayable_trajectory(self, session, tmp_path):
        feed_meeting(session)
        session.handle(
            {"type": "set_gold_normalization", "start_ms": 2000,
             "text": "at 2pm"}
        )
        reply = session.handle({"type": "submit", "name": "meeting"})
        assert reply["type"] == "submitted"
        saved = load_trajectory(str(tmp_path / "meeting.json"))
        records = replay_gold(saved)
        assert records[-1].post_state.content == "Let's meet at 2pm"
        assert saved.gold_programs == {"2000": '(correction "at 2pm")'}
        assert saved.gold_normalizations == {"2000": "at 2pm"}
        assert set(saved.gold_states) == {"0", "2000"}

    def test_submit_with_forced_state_replays(self, session, tmp_path):
        feed_meeting(session)
        session.handle(
            {"type": "set_post_state", "start_ms": 2000,
             "content": "Let's meet at 2:00pm"}
        )
        session.handle({"type": "submit", "name": "forced"})
        saved = load_trajectory(str(tmp_path / "forced.json"))
        records = replay_gold(saved)
        assert records[1].overridden is True
        assert records[1].post_state.content == "Let's meet at 2:00pm"
        assert "2000" not in saved.gold_programs

    def test_submit_blocked_by_flags(self, tmp_path):
        session = AnnotationSession(tmp_path, initial_content="abc")
        ev = final(1, "go to the end", words(0, 100, "go", "to", "the", "end"))
        session.handle({"type": "key_down", "t_ms": 0})
        session.handle({"type": "asr_event", "event": ev.to_json()})
        session.handle({"type": "key_up", "t_ms": 500})
        reply = session.handle({"type": "submit", "name": "flagged"})
        assert reply["type"] == "error"
        assert "flag" in reply["message"]
        assert not (tmp_path / "flagged.json").exists()

    def test_submit_requires_sane_name(self, session):
        feed_meeting(session)
        assert session.handle({"type": "submit", "name": "../evil"})["type"] == "error"
        assert session.handle({"type": "submit", "name": ""})["type"] == "error"

    def test_submit_nothing(self, session):
        assert session.handle({"type": "submit", "name": "empty"})["type"] == "error"


class TestClipEvents:
    def test_whole_and_straddling_events(self):
        a = final(1, "a b", words(0, 500, "a", "b"))
        b = final(2, "c d", words(1000, 500, "c", "d"))
        kept = _clip_events([a, b], 1500)
        assert kept[0] == a
        assert kept[1].text == "c"
        assert kept[1].kind == "final"
        assert len(kept[1].tokens) == 1

    def test_event_fully_after_cut_is_dropped(self):
        a = final(1, "a b", words(0, 500, "a", "b"))
        b = final(2, "c d", words(1000, 500, "c", "d"))
        assert _clip_events([a, b], 1000) == [a]

    def test_untimed_event_refused(self):
        with pytest.raises(ValueError):
            _clip_events([AsrEvent("final", 1, "x", ())], 100)


class TestHttp:
    @pytest.fixture()
    def client(self, tmp_path):
        app = create_app(tmp_path)
        return TestClient(app)

    def test_prompts_ship_with_the_package(self, client):
        prompts = client.get("/prompts").json()
        assert len(prompts) >= 5
        keys = {"id", "task", "initial_content", "target_content"}
        assert all(keys <= set(p) for p in prompts)
        # at least one verbatim-replication prompt for the diff view
        assert any(p["target_content"] for p in prompts)

    def test_trajectory_storage_round_trip(self, client):
        from test_trajectory import email_trajectory

        body = email_trajectory().to_json()
        put = client.put("/trajectories/email", json=body)
        assert put.status_code == 200
        assert client.get("/trajectories/email").json() == body
        listing = client.get("/trajectories").json()
        assert listing[0]["name"] == "email"
        assert listing[0]["n_events"] == 6

    def test_put_rejects_schema_violations(self, client):
        resp = client.put("/trajectories/bad", json={"task": 5})
        assert resp.status_code == 400
        assert resp.json()["path"].startswith("$.")

    def test_get_missing_is_404(self, client):
        assert client.get("/trajectories/ghost").status_code == 404

    def test_bad_names_rejected(self, client):
        assert client.get("/trajectories/..peek").status_code == 400

    def test_websocket_session_survives_reconnect(self, client):
        with client.websocket_connect("/session/abc") as ws:
            ws.send_json({"type": "reset", "task": "t", "initial_content": ""})
            first = ws.receive_json()
            assert first["type"] == "snapshot"
            ws.send_json({"type": "asr_event", "event": U1.to_json()})
            second = ws.receive_json()
            assert second["seq"] == first["seq"] + 1
            assert second["n_events"] == 1
        with client.websocket_connect("/session/abc") as ws:
            ws.send_json({"type": "key_down", "t_ms": 1900})
            third = ws.receive_json()
            assert third["seq"] > second["seq"]
            assert third["n_events"] == 1

#!/usr/bin/env python3
"""Build the golden trajectory corpus under corpus/golden/.

Each spec scripts one annotation session: dictated stretches, held-key
commands, and the labels an annotator would have confirmed. The build folds
every session under gold stages, asserts each command produced the expected
program and each session the expected final document, refuses anything that
does not replay cleanly, and only then writes the files.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace as dc_replace
from pathlib import Path

from edict.asr import AsrEvent, Token
from edict.document import DocumentState
from edict.segmentation import COMMAND, Segment
from edict.trajectory import (
    Trajectory,
    evaluate,
    gold_interpreter,
    gold_normalizer,
    gold_records,
    replay_gold,
    save_trajectory,
    validate_trajectory,
)

WORD_MS = 300
GAP_MS = 400
HOLD_PAD_MS = 150


@dataclass
class Dictate:
    text: str
    partial: bool = True  # emit a half-length partial first


@dataclass
class Command:
    asr: str
    program: str | None = None  # expected template output, asserted
    norm: str | None = None  # gold utterance when the ASR text is noisy
    override: str | None = None  # explicit gold program, bypasses templates


@dataclass
class Spec:
    name: str
    task: str
    turns: list
    final: str
    initial: str = ""


SPECS = [
    Spec(
        "meeting-correction",
        "Propose a meeting time, fix it by voice, finish the sentence.",
        [
            Dictate("Let's meet at 1pm"),
            Command("at 2pm", '(correction "at 2pm")'),
            Dictate("to discuss the analysis"),
            Command(
                "insert a period at the end",
                '(insert "." (thePosition (atEnd)))',
            ),
        ],
        "Let's meet at 2pm to discuss the analysis.",
    ),
    Spec(
        "espeak-capitalize",
        "Dictate a sentence, then fix the casing of a product name.",
        [
            Dictate("Attached are the espeak events."),
            Command(
                "capitalize the s in espeak",
                '(capitalize (theText (and (like "s")'
                ' (in (theText (like "espeak"))))))',
            ),
        ],
        "Attached are the eSpeak events.",
    ),
    Spec(
        "report-lowercase",
        "Tone down stray capitals in a dictated reminder.",
        [
            Dictate("Send The Report Today"),
            Command(
                "lowercase the t in the",
                '(lowercase (theText (and (like "t")'
                ' (in (theText (like "the"))))))',
            ),
            Command("lowercase report", '(lowercase (theText (like "report")))'),
        ],
        "Send the report Today",
    ),
    Spec(
        "acronym-allcaps",
        "Dictate a reply and shout the acronym.",
        [
            Dictate("please reply asap thanks"),
            Command("all caps asap", '(allCaps (theText (like "asap")))'),
        ],
        "please reply ASAP thanks",
    ),
    Spec(
        "spell-at-cursor",
        "Spell an acronym letter by letter at the end of a note.",
        [Command("spell a s a p", '(spell "a s a p")')],
        "Reply when you can asap",
        initial="Reply when you can ",
    ),
    Spec(
        "street-respell",
        "Fix a misrecognized street name by respelling it.",
        [
            Command(
                "respell stret as Street",
                '(respell (theText (like "stret")) "Street")',
            )
        ],
        "Send it to 42 Elm Street",
        initial="Send it to 42 Elm Stret",
    ),
    Spec(
        "quote-title",
        "Put a book title in quotes and end with a question mark.",
        [
            Dictate("have you read dune yet"),
            Command("quote dune", '(quote (theText (like "dune")))'),
            Command(
                "insert a question mark at the end",
                '(insert "?" (thePosition (atEnd)))',
            ),
        ],
        'have you read "dune" yet?',
    ),
    Spec(
        "parens-aside",
        "Wrap an aside in parentheses.",
        [
            Dictate("the budget mostly travel is due"),
            Command(
                "parenthesize mostly travel",
                '(parenthesize (theText (like "mostly travel")))',
            ),
        ],
        "the budget (mostly travel) is due",
    ),
    Spec(
        "offsite-combine",
        "Close up a compound the recognizer split in two.",
        [
            Dictate("the off site meeting moved"),
            Command(
                "no space in off site", '(combine (theText (like "off site")))'
            ),
        ],
        "the offsite meeting moved",
    ),
    Spec(
        "join-sentences",
        "Dictate two short sentences, then run them together.",
        [
            Dictate("It works. We tested it."),
            Command("join the last two sentences", "(combineSentences)"),
        ],
        "It works we tested it.",
    ),
    Spec(
        "groceries-delete",
        "Dictate a list, then prune it by voice.",
        [
            Dictate("eggs milk butter jam"),
            Command("delete butter", '(delete (theText (like "butter")))'),
            Command("delete the last word", "(delete (nthToLast 1 (word)))"),
        ],
        "eggs milk",
    ),
    Spec(
        "dedupe-findall",
        "Strip a stuttered word everywhere at once.",
        [
            Dictate("very very good very nice"),
            Command("delete all very", '(delete (findAll (like "very")))'),
        ],
        "good nice",
    ),
    Spec(
        "swap-replace",
        "Change the time, then soften the wording.",
        [
            Dictate("come at 1pm sharp"),
            Command(
                "replace 1pm with 2pm", '(replace (theText (like "1pm")) "2pm")'
            ),
            Command(
                "change sharp to please",
                '(replace (theText (like "sharp")) "please")',
            ),
        ],
        "come at 2pm please",
    ),
    Spec(
        "move-to-end",
        "Move the thanks to the end of the message.",
        [
            Dictate("thanks see you soon"),
            Command(
                "move thanks to the end",
                '(move (theText (like "thanks")) (thePosition (atEnd)))',
            ),
        ],
        "see you soon thanks",
    ),
    Spec(
        "move-before",
        "Reorder two words by voice.",
        [
            Dictate("the report draft final"),
            Command(
                "move final before draft",
                '(move (theText (like "final"))'
                " (thePosition (before (theText (like \"draft\")))))",
            ),
        ],
        "the report final draft",
    ),
    Spec(
        "select-then-correct",
        "Select a word, then correct the selection with a pronoun.",
        [
            Dictate("the quick brown fox"),
            Command(
                "select the word quick", '(moveCursor (theText (like "quick")))'
            ),
            Command("correct that to slow", '(correction "slow")'),
        ],
        "the slow brown fox",
    ),
    Spec(
        "cursor-then-delete",
        "Jump to the front and drop the first word.",
        [
            Command(
                "go to the beginning", "(moveCursor (thePosition (atStart)))"
            ),
            Command("delete the first word", "(delete (nth 1 (word)))"),
        ],
        "bring the charger",
        initial="PS bring the charger",
    ),
    Spec(
        "do-composite",
        "One utterance, two edits: a hand-written compound program.",
        [
            Command(
                "clean that up",
                override='(do (lowercase (theText (like "the")))'
                ' (insert "!" (thePosition (atEnd))))',
            )
        ],
        "the END!",
        initial="THE END",
    ),
    Spec(
        "noisy-normalization",
        "The recognizer splits a word; the gold utterance repairs it.",
        [
            Dictate("the estimate is ready"),
            Command(
                "capitalize esti mate",
                '(capitalize (theText (like "estimate")))',
                norm="capitalize estimate",
            ),
        ],
        "the Estimate is ready",
    ),
    Spec(
        "punctuation-pass",
        "Dictate without punctuation, then add all of it by voice.",
        [
            Dictate("we shipped it friday"),
            Command(
                "capitalize friday", '(capitalize (theText (like "friday")))'
            ),
            Command(
                "insert a comma after it",
                '(insert "," (thePosition (after (theText (like "it")))))',
            ),
            Command(
                "insert a period at the end",
                '(insert "." (thePosition (atEnd)))',
            ),
            Command("capitalize we", '(capitalize (theText (like "we")))'),
        ],
        "We shipped it, Friday.",
    ),
    Spec(
        "plain-dictation",
        "A dictation-only session; nothing to interpret.",
        [Dictate("just a quick note")],
        "just a quick note",
    ),
]


def build(spec: Spec) -> Trajectory:
    clock = 0
    uid = 0
    events: list[AsrEvent] = []
    intervals: list[tuple[int, int]] = []
    gold_norms: dict[str, str] = {}
    seeded_programs: dict[str, str] = {}

    for turn in spec.turns:
        uid += 1
        text = turn.text if isinstance(turn, Dictate) else turn.asr
        words = text.split()
        tokens = tuple(
            Token(w, clock + i * WORD_MS, clock + (i + 1) * WORD_MS)
            for i, w in enumerate(words)
        )
        start, end = tokens[0].start_ms, tokens[-1].end_ms
        if isinstance(turn, Dictate):
            if turn.partial and len(words) > 1:
                half = len(words) // 2
                events.append(
                    AsrEvent(
                        "partial", uid, " ".join(words[:half]), tokens[:half]
                    )
                )
            events.append(AsrEvent("final", uid, text, tokens))
        else:
            intervals.append((start - HOLD_PAD_MS, end + HOLD_PAD_MS))
            events.append(AsrEvent("final", uid, text, tokens))
            if turn.norm:
                gold_norms[str(start)] = turn.norm
            if turn.override:
                seeded_programs[str(start)] = turn.override
        clock = end + GAP_MS

    n = len(spec.initial)
    base = Trajectory(
        task=spec.task,
        initial_state=DocumentState(spec.initial, (n, n)),
        events=tuple(events),
        key_intervals=tuple(intervals),
        gold_normalizations=gold_norms,
        gold_programs=seeded_programs,
    )
    records = gold_records(base)

    command_turns = [t for t in spec.turns if isinstance(t, Command)]
    command_records = [r for r in records if r.kind == COMMAND]
    assert len(command_records) == len(command_turns), (
        f"{spec.name}: {len(command_records)} command segments,"
        f" expected {len(command_turns)}"
    )
    gold_programs = dict(seeded_programs)
    for turn, record in zip(command_turns, command_records):
        assert record.error is None, (spec.name, record.error)
        if turn.program is not None:
            assert record.program == turn.program, (
                f"{spec.name}: template produced {record.program},"
                f" expected {turn.program}"
            )
        gold_programs[str(record.start_ms)] = record.program

    final = records[-1].post_state.content
    assert final == spec.final, (
        f"{spec.name}: session ends at {final!r}, expected {spec.final!r}"
    )

    trajectory = dc_replace(
        base,
        gold_programs=gold_programs,
        gold_states={str(r.start_ms): r.post_state for r in records},
        gold_segments={
            str(len(events) - 1): tuple(
                Segment(r.kind, r.token_start, r.token_end) for r in records
            )
        },
    )
    validate_trajectory(trajectory.to_json())
    replay_gold(trajectory)
    return trajectory


def main() -> int:
    out_dir = Path(__file__).resolve().parent.parent / "corpus" / "golden"
    out_dir.mkdir(parents=True, exist_ok=True)
    pairs = []
    for spec in SPECS:
        trajectory = build(spec)
        path = out_dir / f"{spec.name}.json"
        save_trajectory(str(path), trajectory)
        pairs.append((spec.name, trajectory))
        print(f"  {spec.name}: {len(trajectory.events)} events -> {path.name}")

    report = evaluate(
        [
            (name, t)
            for name, t in pairs
        ],
    )
    # Under its own gold stages every trajectory must score perfectly.
    gold_report = None
    for name, t in pairs:
        r = evaluate(
            [(name, t)],
            normalizer=gold_normalizer(t),
            interpreter=gold_interpreter(t),
        )
        for metric, value in r.pooled.items():
            assert value == 1.0, (name, metric, value)
        gold_report = r
    print(f"{len(pairs)} trajectories; gold-stage metrics all 1.0")
    print(f"shipped-stage pooled: {report.pooled}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

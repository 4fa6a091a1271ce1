"""Rule-based interpretation of command utterances.

An ordered table of surface templates maps spoken phrasings onto programs. A
hit is confident; anything unmatched degrades to a catch-all correction whose
argument is the utterance itself, which downstream fuzzy matching can often
still place.
"""

from __future__ import annotations

import math
import re
from typing import Callable, Optional

from .dsl.ast import Action, Constraint, Program, Target

TEMPLATE_CONFIDENCE = math.log(0.95)
FALLBACK_CONFIDENCE = math.log(0.3)

# Spoken names for characters that dictation systems render as symbols.
SPOKEN_SYMBOLS = {
    "period": ".", "full stop": ".", "dot": ".",
    "comma": ",",
    "question mark": "?",
    "exclamation point": "!", "exclamation mark": "!",
    "colon": ":", "semicolon": ";",
    "dash": "-", "hyphen": "-",
    "underscore": "_", "slash": "/",
    "ampersand": "&", "at sign": "@",
    "percent sign": "%", "dollar sign": "$",
    "new line": "\n", "newline": "\n",
    "tab": "\t", "space": " ",
    "open paren": "(", "close paren": ")",
    "quote": '"', "double quote": '"',
    "single quote": "'", "apostrophe": "'",
}

_UNIT_NAMES = {
    "word": "word", "words": "word",
    "letter": "letter", "letters": "letter",
    "sentence": "sentence", "sentences": "sentence",
    "line": "line", "lines": "line",
    "phrase": "phrase", "phrases": "phrase",
    "paragraph": "passage", "paragraphs": "passage",
}


def spoken_payload(chunk: str) -> str:
    """Literal text for an insert/replace argument."""
    return SPOKEN_SYMBOLS.get(chunk.strip().lower(), chunk)


def _constraint_for(chunk: str) -> Constraint:
    """A unit name selects that unit; anything else fuzzy-matches its text."""
    unit = _UNIT_NAMES.get(chunk.strip().lower())
    if unit:
        return Constraint(unit, ())
    return Constraint("like", (chunk.lower(),))


def _the_text(chunk: str) -> Target:
    return Target("theText", (_constraint_for(chunk),))


def _position(c: Constraint) -> Target:
    return Target("thePosition", (c,))


def _case_in_scope(head: str, letter: str, scope: str) -> Action:
    inner = Constraint(
        "and",
        (
            Constraint("like", (letter.lower(),)),
            Constraint("in", (Target("theText", (Constraint("like", (scope.lower(),)),)),)),
        ),
    )
    return Action(head, (Target("theText", (inner,)),))


_Builder = Callable[[re.Match], Action]


def _rule(pattern: str, builder: _Builder) -> tuple[re.Pattern, _Builder]:
    return re.compile(pattern, re.IGNORECASE), builder


TEMPLATES: list[tuple[re.Pattern, _Builder]] = [
    _rule(
        r"^(capitalize|lowercase) (?:the )?(?:letter )?(.+?) in (.+)$",
        lambda m: _case_in_scope(m.group(1).lower(), m.group(2), m.group(3)),
    ),
    _rule(
        r"^capitalize (?:the )?(?:word )?(.+)$",
        lambda m: Action("capitalize", (_the_text(m.group(1)),)),
    ),
    _rule(
        r"^lowercase (?:the )?(?:word )?(.+)$",
        lambda m: Action("lowercase", (_the_text(m.group(1)),)),
    ),
    _rule(
        r"^(?:all caps|uppercase) (.+)$",
        lambda m: Action("allCaps", (_the_text(m.group(1)),)),
    ),
    _rule(
        r"^delete (?:the )?last (.+)$",
        lambda m: Action(
            "delete", (Target("nthToLast", (1, _constraint_for(m.group(1)))),)
        ),
    ),
    _rule(
        r"^delete (?:the )?first (.+)$",
        lambda m: Action(
            "delete", (Target("nth", (1, _constraint_for(m.group(1)))),)
        ),
    ),
    _rule(
        r"^delete (?:all|every) (.+)$",
        lambda m: Action("delete", (Target("findAll", (_constraint_for(m.group(1)),)),)),
    ),
    _rule(
        r"^(?:delete|remove|erase) (?:the )?(.+)$",
        lambda m: Action("delete", (_the_text(m.group(1)),)),
    ),
    _rule(
        r"^insert (?:a |an )?(.+?) at the (?:end|back)$",
        lambda m: Action(
            "insert",
            (spoken_payload(m.group(1)), _position(Constraint("atEnd", ()))),
        ),
    ),
    _rule(
        r"^insert (?:a |an )?(.+?) at the (?:beginning|start|front)$",
        lambda m: Action(
            "insert",
            (spoken_payload(m.group(1)), _position(Constraint("atStart", ()))),
        ),
    ),
    _rule(
        r"^insert (?:a |an )?(.+?) before (.+)$",
        lambda m: Action(
            "insert",
            (
                spoken_payload(m.group(1)),
                _position(Constraint("before", (_the_text(m.group(2)),))),
            ),
        ),
    ),
    _rule(
        r"^insert (?:a |an )?(.+?) after (.+)$",
        lambda m: Action(
            "insert",
            (
                spoken_payload(m.group(1)),
                _position(Constraint("after", (_the_text(m.group(2)),))),
            ),
        ),
    ),
    _rule(
        r"^(?:insert|add|type) (?:a |an )?(.+)$",
        lambda m: Action("insert", (spoken_payload(m.group(1)),)),
    ),
    _rule(
        r"^replace (.+?) with (.+)$",
        lambda m: Action(
            "replace", (_the_text(m.group(1)), spoken_payload(m.group(2)))
        ),
    ),
    _rule(
        r"^change (.+?) to (.+)$",
        lambda m: Action(
            "replace", (_the_text(m.group(1)), spoken_payload(m.group(2)))
        ),
    ),
    _rule(
        r"^(?:correct|correction|make) (?:that|this|it) (?:to )?(.+)$",
        lambda m: Action("correction", (m.group(1),)),
    ),
    _rule(
        r"^(?:correction|correct) (.+)$",
        lambda m: Action("correction", (m.group(1),)),
    ),
    # Cursor motion has to outrank (move <target> ...) or "move the cursor
    # to the end" reads as moving the text "cursor".
    _rule(
        r"^(?:go|move(?: the)? cursor) to the (?:end|back)$",
        lambda m: Action("moveCursor", (_position(Constraint("atEnd", ())),)),
    ),
    _rule(
        r"^(?:go|move(?: the)? cursor) to the (?:beginning|start|front)$",
        lambda m: Action("moveCursor", (_position(Constraint("atStart", ())),)),
    ),
    _rule(
        r"^move (?:the )?(.+?) to the (?:end|back)$",
        lambda m: Action(
            "move", (_the_text(m.group(1)), _position(Constraint("atEnd", ())))
        ),
    ),
    _rule(
        r"^move (?:the )?(.+?) to the (?:beginning|start|front)$",
        lambda m: Action(
            "move", (_the_text(m.group(1)), _position(Constraint("atStart", ())))
        ),
    ),
    _rule(
        r"^move (?:the )?(.+?) (?:to )?before (.+)$",
        lambda m: Action(
            "move",
            (
                _the_text(m.group(1)),
                _position(Constraint("before", (_the_text(m.group(2)),))),
            ),
        ),
    ),
    _rule(
        r"^move (?:the )?(.+?) (?:to )?after (.+)$",
        lambda m: Action(
            "move",
            (
                _the_text(m.group(1)),
                _position(Constraint("after", (_the_text(m.group(2)),))),
            ),
        ),
    ),
    _rule(
        r"^(?:select|highlight) (?:the )?(?:word )?(.+)$",
        lambda m: Action("moveCursor", (_the_text(m.group(1)),)),
    ),
    _rule(
        r"^respell (.+?) as (.+)$",
        lambda m: Action("respell", (_the_text(m.group(1)), m.group(2))),
    ),
    _rule(
        r"^spell (.+)$",
        lambda m: Action("spell", (m.group(1),)),
    ),
    _rule(
        r"^(?:quote|put quotes around) (?:the )?(.+)$",
        lambda m: Action("quote", (_the_text(m.group(1)),)),
    ),
    _rule(
        r"^(?:parenthesize|put (?:parentheses|parens) around) (?:the )?(.+)$",
        lambda m: Action("parenthesize", (_the_text(m.group(1)),)),
    ),
    _rule(
        r"^(?:combine|join) (?:the )?(?:last two )?sentences$",
        lambda m: Action("combineSentences", ()),
    ),
    _rule(
        r"^(?:combine|no space in) (?:the )?(.+)$",
        lambda m: Action("combine", (_the_text(m.group(1)),)),
    ),
]


def strip_terminator(utterance: str) -> str:
    """Drop one trailing sentence terminator the recognizer tacked on."""
    u = utterance.strip()
    if u and u[-1] in ".!?":
        u = u[:-1].rstrip()
    return u


def template_interpret(utterance: str) -> tuple[Program, float]:
    """Interpret one command utterance; always returns some program."""
    u = strip_terminator(utterance)
    for pattern, builder in TEMPLATES:
        m = pattern.match(u)
        if m:
            return builder(m), TEMPLATE_CONFIDENCE
    return Action("correction", (u,)), FALLBACK_CONFIDENCE

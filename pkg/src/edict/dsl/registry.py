"""The closed grammar of the command language.

Every head an expression may use is declared here with its accepted argument
signatures; anything else is a parse error. Signature codes:

    A  action expression        T  target expression
    C  constraint expression    L  quoted string literal
    I  integer (1-based index or count)

A head may accept several signatures (optional arguments). Variadic heads
declare an element code and a minimum count instead.

Target heads
    theText c       best-ranked span matching c, as text
    thePosition c   best-ranked position matching c (zero-width spans first;
                    falls back to the start of the best full span)
    findAll c       every span matching c, in document order
    nth k c         k-th match in document order
    nthToLast k c   k-th match counting from the end
    take k c        first k matches in document order

Constraint heads
    like s          fuzzy match: case-insensitive, punctuation tolerated via
                    edit distance; score = 1 - normalized Levenshtein over
                    lowercase forms, spans under 0.6 discarded, and a span is
                    dropped when an overlapping span scores strictly higher
    exactly s / hasSubstring s / startsWith s / endsWith s
                    literal string tests on the span text
    word, letter, sentence, line, phrase, passage, parenthetical, text
                    structural units (see edict.dsl.units for the shared
                    tokenizers); "text" means a maximal non-whitespace run
    empty           zero-width spans (positions)
    extra           second and later copies in doubled adjacent words, and the
                    surplus characters of multi-space runs
    alwaysTrue      admits every span in the active scope
    atStart, atEnd  the zero-width span at the document's first/last offset
    in t / contains t / nextTo t / at t
                    containment, adjacency, and coincidence with a target
    before t / after t / between t1 t2
                    ordering relative to targets; candidates score 1/(1+gap)
                    so the span nearest its anchor ranks first
    and c...        intersection; scores multiply
    or c... / union c...
                    merge; score is the best admitting child's (union is an
                    alias of or)

Action heads
    capitalize t    uppercase the first character of the target
    lowercase t     lowercase the whole target
    allCaps t       uppercase the whole target
    delete t        remove the target, absorbing one adjacent space
    insert s [t]    place literal text at the target position, or type it at
                    the cursor when no target is given
    replace t s     swap the target for literal text
    move t t        relocate the target text to the second target's position
    moveCursor t    set the selection to the target without editing
    spell s         type the letter-sequence rendering of the literal
    respell t s     replace the target with the letter-sequence rendering
    quote t         wrap the target in double quotes
    parenthesize t  wrap the target in parentheses
    combineSentences [t]
                    join the sentence at the target (last two sentences when
                    no target) with its neighbor, dropping the terminator
    combine t       remove all whitespace inside the target
    correction [t] s
                    replace the target with the literal; with no target,
                    replace the best fuzzy match of the literal within the
                    120 characters before the cursor
    do a...         run actions left to right (zero actions is the identity)

Arities not pinned down by usage evidence (at, atStart, atEnd, spell, respell,
combine, combineSentences, move and the index argument order of nth-style
heads) are this implementation's choices; they are the contract here.
"""

from __future__ import annotations

ACTION = "action"
TARGET = "target"
CONSTRAINT = "constraint"

# head -> list of accepted signatures (tuples of codes)
ACTION_SIGNATURES: dict[str, list[tuple[str, ...]]] = {
    "capitalize": [("T",)],
    "lowercase": [("T",)],
    "allCaps": [("T",)],
    "delete": [("T",)],
    "insert": [("L",), ("L", "T")],
    "replace": [("T", "L")],
    "move": [("T", "T")],
    "moveCursor": [("T",)],
    "spell": [("L",)],
    "respell": [("T", "L")],
    "quote": [("T",)],
    "parenthesize": [("T",)],
    "combineSentences": [(), ("T",)],
    "combine": [("T",)],
    "correction": [("L",), ("T", "L")],
}

TARGET_SIGNATURES: dict[str, list[tuple[str, ...]]] = {
    "theText": [("C",)],
    "thePosition": [("C",)],
    "findAll": [("C",)],
    "nth": [("I", "C")],
    "nthToLast": [("I", "C")],
    "take": [("I", "C")],
}

CONSTRAINT_SIGNATURES: dict[str, list[tuple[str, ...]]] = {
    "like": [("L",)],
    "exactly": [("L",)],
    "hasSubstring": [("L",)],
    "startsWith": [("L",)],
    "endsWith": [("L",)],
    "word": [()],
    "letter": [()],
    "sentence": [()],
    "line": [()],
    "phrase": [()],
    "passage": [()],
    "parenthetical": [()],
    "text": [()],
    "empty": [()],
    "extra": [()],
    "alwaysTrue": [()],
    "atStart": [()],
    "atEnd": [()],
    "in": [("T",)],
    "contains": [("T",)],
    "before": [("T",)],
    "after": [("T",)],
    "nextTo": [("T",)],
    "at": [("T",)],
    "between": [("T", "T")],
}

# head -> (element code, minimum child count)
VARIADIC: dict[str, tuple[str, int]] = {
    "do": ("A", 0),
    "and": ("C", 2),
    "or": ("C", 2),
    "union": ("C", 2),
}

STRUCTURAL_HEADS = (
    "word",
    "letter",
    "sentence",
    "line",
    "phrase",
    "passage",
    "parenthetical",
    "text",
)


def kind_of(head: str) -> str | None:
    """Which expression kind a head builds, or None for unknown heads."""
    if head in ACTION_SIGNATURES or VARIADIC.get(head, ("",))[0] == "A":
        return ACTION
    if head in TARGET_SIGNATURES:
        return TARGET
    if head in CONSTRAINT_SIGNATURES or VARIADIC.get(head, ("",))[0] == "C":
        return CONSTRAINT
    return None


def all_heads() -> dict[str, str]:
    """Every head mapped to its kind."""
    heads = {}
    for name in (*ACTION_SIGNATURES, "do"):
        heads[name] = ACTION
    for name in TARGET_SIGNATURES:
        heads[name] = TARGET
    for name in (*CONSTRAINT_SIGNATURES, "and", "or", "union"):
        heads[name] = CONSTRAINT
    return heads

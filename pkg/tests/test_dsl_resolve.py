"""Constraint resolution against the brute-force reference resolver."""

import random

import pytest

from edict.document import DocumentState, Span
from edict.dsl.ast import Constraint, Target
from edict.dsl.parser import parse_program
from edict.dsl.resolve import ResolutionContext, resolve, resolve_target
from edict.errors import ResolutionError

from gencases import random_constraint, random_document
from oracle import OracleResolver, OracleUnresolvable


def ranked(d, c, scope="all"):
    out = resolve(d, c, ResolutionContext(scope=scope))
    return [(rt.spans[0], rt.score) for rt in out]


class TestWorkedExamples:
    def test_fuzzy_match_dedupes_overlaps(self):
        d = DocumentState("the cat the hat", (15, 15))
        out = ranked(d, Constraint("like", ("the",)))
        assert [(s.start, s.end, sc) for s, sc in out] == [
            (8, 11, 1.0),
            (0, 3, 1.0),
        ]

    def test_capitalize_target_of_reference_program(self):
        d = DocumentState("Attached are the espeak events.", (31, 31))
        program = parse_program(
            '(capitalize (theText (and (like "s") (in (theText (like "espeak"))))))'
        )
        assert resolve_target(d, program.args[0]).primary == Span(18, 19)

    def test_scope_restricts_universe(self):
        d = DocumentState("abc", (0, 0))
        out = ranked(d, Constraint("alwaysTrue", ()), scope="sentence")
        assert [(s.start, s.end) for s, _ in out] == [(0, 3)]

    def test_proximity_breaks_ties(self):
        d = DocumentState("aa bb aa", (7, 7))
        out = ranked(d, Constraint("exactly", ("aa",)))
        assert [s.start for s, _ in out] == [6, 0]

    def test_position_constraints(self):
        d = DocumentState("xy", (0, 0))
        assert ranked(d, Constraint("atStart", ()))[0][0] == Span(0, 0)
        assert ranked(d, Constraint("atEnd", ()))[0][0] == Span(2, 2)

    def test_unresolvable_target_raises(self):
        d = DocumentState("hello", (0, 0))
        with pytest.raises(ResolutionError):
            resolve_target(d, Target("theText", (Constraint("exactly", ("zz",)),)))

    def test_nth_out_of_range_raises(self):
        d = DocumentState("a b", (0, 0))
        with pytest.raises(ResolutionError):
            resolve_target(d, Target("nth", (5, Constraint("word", ()))))

    def test_take_collects_document_order(self):
        d = DocumentState("one two three", (13, 13))
        rt = resolve_target(d, Target("take", (2, Constraint("word", ()))))
        texts = [d.content[s.start:s.end] for s in rt.spans]
        assert texts == ["one", "two"]

    def test_the_position_prefers_zero_width(self):
        d = DocumentState("a b", (0, 0))
        rt = resolve_target(
            d,
            Target(
                "thePosition",
                (Constraint("after", (Target("theText", (Constraint("exactly", ("a",)),)),)),),
            ),
        )
        span = rt.primary
        assert span.start == span.end

    def test_between_scores_gap(self):
        d = DocumentState("a xx b", (0, 0))
        c = Constraint(
            "between",
            (
                Target("theText", (Constraint("exactly", ("a",)),)),
                Target("theText", (Constraint("exactly", ("b",)),)),
            ),
        )
        out = ranked(d, c)
        top_span, top_score = out[0]
        assert top_span == Span(1, 5)
        assert top_score == 1.0


class TestOracleAgreement:
    """Randomized equivalence with full-enumeration resolution."""

    def check_one(self, d, c):
        oracle = OracleResolver(d)
        try:
            expected = oracle.resolve(c)
            expected_error = None
        except OracleUnresolvable:
            expected, expected_error = None, True
        try:
            actual = ranked(d, c)
            actual_error = None
        except ResolutionError:
            actual, actual_error = None, True
        if expected_error or actual_error:
            assert expected_error == actual_error, (d, c)
            return
        assert [(s, sc) for s, sc in actual] == expected, (d.content, c)

    def test_seeded_sample(self):
        rng = random.Random(99)
        for _ in range(150):
            d = random_document(rng)
            c = random_constraint(rng, d.content, rng.randint(0, 3))
            self.check_one(d, c)

    def test_like_on_unicode_case_growth(self):
        # Lowercasing can lengthen text; bounds must not clip matches.
        d = DocumentState("İİİ abc", (0, 0))
        c = Constraint("like", ("i̇i̇i̇",))
        self.check_one(d, c)

    def test_empty_pattern(self):
        d = DocumentState("ab", (2, 2))
        self.check_one(d, Constraint("like", ("",)))

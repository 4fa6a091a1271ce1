"""Constraint resolution: from a constraint expression to ranked spans.

Semantics are predicate-based: every constraint admits a span with a score or
rejects it. The engine generates a complete superset of candidate spans per
head and filters through the predicate, which keeps resolution equal to a
full enumeration over every span of the document while staying fast on the
constraints people actually dictate.

Ranking: score descending, then character distance from the selection focus,
then leftmost, then shortest. Span identity makes that order total.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..document import DocumentState, Span
from ..errors import ResolutionError
from . import units
from .ast import Constraint, Target
from .parser import print_canonical
from .registry import STRUCTURAL_HEADS


@dataclass(frozen=True)
class ResolutionContext:
    """Knobs for resolution.

    scope limits the span universe: "all" means every [i, j) range of the
    document; a structural unit name ("sentence", "word", ...) restricts
    candidates to those units.
    """

    scope: str = "all"


@dataclass(frozen=True)
class ResolvedTarget:
    """One resolved target: its spans (usually one; several for findAll/take)
    and the match score of its best span."""

    spans: tuple[Span, ...]
    score: float

    @property
    def primary(self) -> Span:
        return self.spans[0]


# Lower class number = expected smaller candidate set; used to pick which
# child of an `and` generates candidates for the others to filter.
_SELECTIVITY = {
    "like": 0, "exactly": 0, "extra": 0, "atStart": 0, "atEnd": 0, "at": 0,
    "word": 1, "letter": 1, "sentence": 1, "line": 1, "phrase": 1,
    "passage": 1, "parenthetical": 1, "text": 1,
    "empty": 2, "nextTo": 2,
    "in": 3, "between": 3,
    "startsWith": 4, "endsWith": 4,
    "before": 5, "after": 5, "contains": 5, "hasSubstring": 5,
    "alwaysTrue": 9,
}


def _selectivity(c: Constraint) -> int:
    if c.head in ("and", "or", "union"):
        ranks = [_selectivity(a) for a in c.args if isinstance(a, Constraint)]
        if c.head == "and":
            return min(ranks)
        return max(ranks)
    return _SELECTIVITY[c.head]


class _Resolver:
    def __init__(self, d: DocumentState, ctx: ResolutionContext):
        self.d = d
        self.text = d.content
        self.ctx = ctx
        self._like: dict[str, dict[Span, float]] = {}
        self._unit_sets: dict[str, set[Span]] = {}
        self._extras: set[Span] | None = None
        self._targets: dict[Target, ResolvedTarget] = {}

    # -- shared lookups ----------------------------------------------------

    def like(self, pattern: str) -> dict[Span, float]:
        if pattern not in self._like:
            self._like[pattern] = units.like_matches(self.text, pattern)
        return self._like[pattern]

    def unit_set(self, head: str) -> set[Span]:
        if head not in self._unit_sets:
            self._unit_sets[head] = set(units.UNIT_SPANS[head](self.text))
        return self._unit_sets[head]

    def extras(self) -> set[Span]:
        if self._extras is None:
            self._extras = set(units.extra_spans(self.text))
        return self._extras

    def anchors(self, t: Target) -> tuple[Span, ...]:
        return self.target(t).spans

    # -- predicate ---------------------------------------------------------

    def admit(self, c: Constraint, span: Span) -> float | None:
        """Score of span under c, or None when c rejects it."""
        head = c.head
        text = self.text
        if head == "like":
            return self.like(c.args[0]).get(span)
        if head == "exactly":
            return 1.0 if text[span.start : span.end] == c.args[0] else None
        if head == "hasSubstring":
            return 1.0 if c.args[0] in text[span.start : span.end] else None
        if head == "startsWith":
            return 1.0 if text[span.start : span.end].startswith(c.args[0]) else None
        if head == "endsWith":
            return 1.0 if text[span.start : span.end].endswith(c.args[0]) else None
        if head in STRUCTURAL_HEADS:
            return 1.0 if span in self.unit_set(head) else None
        if head == "empty":
            return 1.0 if len(span) == 0 else None
        if head == "extra":
            return 1.0 if span in self.extras() else None
        if head == "alwaysTrue":
            return 1.0
        if head == "atStart":
            return 1.0 if span == Span(0, 0) else None
        if head == "atEnd":
            limit = len(text)
            return 1.0 if span == Span(limit, limit) else None
        if head == "in":
            if any(a.contains(span) for a in self.anchors(c.args[0])):
                return 1.0
            return None
        if head == "contains":
            if any(span.contains(a) for a in self.anchors(c.args[0])):
                return 1.0
            return None
        if head == "before":
            gaps = [
                a.start - span.end
                for a in self.anchors(c.args[0])
                if span.end <= a.start
            ]
            return max((1.0 / (1 + g) for g in gaps), default=None)
        if head == "after":
            gaps = [
                span.start - a.end
                for a in self.anchors(c.args[0])
                if span.start >= a.end
            ]
            return max((1.0 / (1 + g) for g in gaps), default=None)
        if head == "between":
            best = None
            for first in self.anchors(c.args[0]):
                for second in self.anchors(c.args[1]):
                    if first.end <= span.start and span.end <= second.start:
                        gap = (span.start - first.end) + (second.start - span.end)
                        score = 1.0 / (1 + gap)
                        if best is None or score > best:
                            best = score
            return best
        if head == "nextTo":
            for a in self.anchors(c.args[0]):
                if span.end == a.start or span.start == a.end:
                    return 1.0
            return None
        if head == "at":
            for a in self.anchors(c.args[0]):
                if span.start == a.start and span.end == a.end:
                    return 1.0
            return None
        if head == "and":
            total = 1.0
            for child in c.args:
                score = self.admit(child, span)
                if score is None:
                    return None
                total *= score
            return total
        if head in ("or", "union"):
            scores = [self.admit(child, span) for child in c.args]
            scores = [s for s in scores if s is not None]
            return max(scores) if scores else None
        raise ValueError(f"unhandled constraint head {head!r}")

    # -- candidate generation ----------------------------------------------

    def all_spans(self) -> set[Span]:
        n = len(self.text)
        return {Span(i, j) for i in range(n + 1) for j in range(i, n + 1)}

    def candidate_spans(self, c: Constraint) -> set[Span]:
        """A complete superset of the spans c admits (scope "all")."""
        head = c.head
        text = self.text
        n = len(text)
        if head == "like":
            return set(self.like(c.args[0]))
        if head == "exactly":
            literal = c.args[0]
            if not literal:
                return {Span(i, i) for i in range(n + 1)}
            return {
                Span(i, i + len(literal)) for i in _occurrences(text, literal)
            }
        if head == "hasSubstring":
            literal = c.args[0]
            if not literal:
                return self.all_spans()
            spans = set()
            for o in _occurrences(text, literal):
                close = o + len(literal)
                spans.update(
                    Span(a, b)
                    for a in range(o + 1)
                    for b in range(close, n + 1)
                )
            return spans
        if head == "startsWith":
            literal = c.args[0]
            if not literal:
                return self.all_spans()
            return {
                Span(o, b)
                for o in _occurrences(text, literal)
                for b in range(o + len(literal), n + 1)
            }
        if head == "endsWith":
            literal = c.args[0]
            if not literal:
                return self.all_spans()
            return {
                Span(a, o + len(literal))
                for o in _occurrences(text, literal)
                for a in range(o + 1)
            }
        if head in STRUCTURAL_HEADS:
            return set(self.unit_set(head))
        if head == "empty":
            return {Span(i, i) for i in range(n + 1)}
        if head == "extra":
            return set(self.extras())
        if head == "alwaysTrue":
            return self.all_spans()
        if head == "atStart":
            return {Span(0, 0)}
        if head == "atEnd":
            return {Span(n, n)}
        if head == "in":
            spans = set()
            for a in self.anchors(c.args[0]):
                spans.update(
                    Span(i, j)
                    for i in range(a.start, a.end + 1)
                    for j in range(i, a.end + 1)
                )
            return spans
        if head == "contains":
            spans = set()
            for a in self.anchors(c.args[0]):
                spans.update(
                    Span(i, j)
                    for i in range(a.start + 1)
                    for j in range(a.end, n + 1)
                )
            return spans
        if head == "before":
            spans = set()
            for a in self.anchors(c.args[0]):
                spans.update(
                    Span(i, j)
                    for j in range(a.start + 1)
                    for i in range(j + 1)
                )
            return spans
        if head == "after":
            spans = set()
            for a in self.anchors(c.args[0]):
                spans.update(
                    Span(i, j)
                    for i in range(a.end, n + 1)
                    for j in range(i, n + 1)
                )
            return spans
        if head == "between":
            spans = set()
            for first in self.anchors(c.args[0]):
                for second in self.anchors(c.args[1]):
                    if first.end <= second.start:
                        spans.update(
                            Span(i, j)
                            for i in range(first.end, second.start + 1)
                            for j in range(i, second.start + 1)
                        )
            return spans
        if head == "nextTo":
            spans = set()
            for a in self.anchors(c.args[0]):
                spans.update(Span(i, a.start) for i in range(a.start + 1))
                spans.update(Span(a.end, j) for j in range(a.end, n + 1))
            return spans
        if head == "at":
            return {Span(a.start, a.end) for a in self.anchors(c.args[0])}
        if head == "and":
            best = min(
                (a for a in c.args if isinstance(a, Constraint)),
                key=_selectivity,
            )
            return self.candidate_spans(best)
        if head in ("or", "union"):
            spans = set()
            for child in c.args:
                spans.update(self.candidate_spans(child))
            return spans
        raise ValueError(f"unhandled constraint head {head!r}")

    # -- top level ---------------------------------------------------------

    def _touch_references(self, c: Constraint) -> None:
        # A dangling reference is an error even inside a branch that admits
        # nothing; candidate pruning must never decide whether it surfaces.
        for arg in c.args:
            if isinstance(arg, Target):
                self.target(arg)
            elif isinstance(arg, Constraint):
                self._touch_references(arg)

    def resolve_constraint(self, c: Constraint) -> list[tuple[Span, float]]:
        self._touch_references(c)
        if self.ctx.scope == "all":
            spans = self.candidate_spans(c)
        else:
            spans = units.UNIT_SPANS[self.ctx.scope](self.text)
        scored = []
        for span in spans:
            score = self.admit(c, span)
            if score is not None:
                scored.append((span, score))
        focus = self.d.focus
        scored.sort(
            key=lambda item: (
                -item[1],
                item[0].distance_to(focus),
                item[0].start,
                item[0].end,
            )
        )
        return scored

    def target(self, t: Target) -> ResolvedTarget:
        if t in self._targets:
            return self._targets[t]
        resolved = self._target_uncached(t)
        self._targets[t] = resolved
        return resolved

    def _target_uncached(self, t: Target) -> ResolvedTarget:
        head = t.head
        if head in ("theText", "thePosition", "findAll"):
            index, constraint = None, t.args[0]
        else:
            index, constraint = t.args

        ranked = self.resolve_constraint(constraint)
        if not ranked:
            raise ResolutionError(print_canonical(constraint))

        if head == "theText":
            span, score = ranked[0]
            return ResolvedTarget((span,), score)
        if head == "thePosition":
            for span, score in ranked:
                if len(span) == 0:
                    return ResolvedTarget((span,), score)
            span, score = ranked[0]
            return ResolvedTarget((Span(span.start, span.start),), score)

        in_doc_order = sorted(ranked, key=lambda item: (item[0].start, item[0].end))
        if head == "findAll":
            return ResolvedTarget(
                tuple(span for span, _ in in_doc_order), ranked[0][1]
            )
        if head == "nth":
            if index > len(in_doc_order):
                raise ResolutionError(print_canonical(t))
            span, score = in_doc_order[index - 1]
            return ResolvedTarget((span,), score)
        if head == "nthToLast":
            if index > len(in_doc_order):
                raise ResolutionError(print_canonical(t))
            span, score = in_doc_order[-index]
            return ResolvedTarget((span,), score)
        if head == "take":
            if index > len(in_doc_order):
                raise ResolutionError(print_canonical(t))
            chosen = in_doc_order[:index]
            return ResolvedTarget(tuple(span for span, _ in chosen), ranked[0][1])
        raise ValueError(f"unhandled target head {head!r}")


def _occurrences(text: str, literal: str) -> list[int]:
    """Every start offset of literal in text, overlapping included."""
    found = []
    at = text.find(literal)
    while at != -1:
        found.append(at)
        at = text.find(literal, at + 1)
    return found


def resolve(
    d: DocumentState, c: Constraint, ctx: ResolutionContext | None = None
) -> list[ResolvedTarget]:
    """Ranked candidate spans satisfying c, each as a single-span target."""
    resolver = _Resolver(d, ctx or ResolutionContext())
    return [
        ResolvedTarget((span,), score)
        for span, score in resolver.resolve_constraint(c)
    ]


def resolve_target(
    d: DocumentState, t: Target, ctx: ResolutionContext | None = None
) -> ResolvedTarget:
    """Resolve a target expression against a document."""
    return _Resolver(d, ctx or ResolutionContext()).target(t)

"""Brute-force reference resolver used to check the engine.

Enumerates every span of the document and tests the constraint predicate on
each one — no candidate generation, no head-specific shortcuts beyond the
mathematically forced length cutoff inside fuzzy scoring. Tokenizers are
imported from the engine on purpose (they are declared in one place); the
edit-distance, admission, and ranking logic here are written independently.
"""

from __future__ import annotations

from edict.document import DocumentState, Span
from edict.dsl.ast import Constraint, Target
from edict.dsl.registry import STRUCTURAL_HEADS
from edict.dsl.units import UNIT_SPANS, extra_spans

LIKE_THRESHOLD = 0.6


class OracleUnresolvable(Exception):
    """A required target matched nothing."""


def _edit_distance(a: str, b: str) -> int:
    # Plain Wagner-Fischer, full table.
    table = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(len(a) + 1):
        table[i][0] = i
    for j in range(len(b) + 1):
        table[0][j] = j
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            table[i][j] = min(
                table[i - 1][j] + 1,
                table[i][j - 1] + 1,
                table[i - 1][j - 1] + cost,
            )
    return table[-1][-1]


def _score(span_text: str, pattern: str) -> float:
    a = span_text.lower()
    b = pattern.lower()
    denom = max(len(a), len(b), 1)
    if abs(len(a) - len(b)) > denom:  # unreachable; kept for symmetry
        return 0.0
    # Length difference alone bounds the distance; skip the table when the
    # bound already fails the threshold. 1 - d/denom is monotone in d, so
    # this can never admit or reject differently from the full computation.
    if 1.0 - abs(len(a) - len(b)) / denom < LIKE_THRESHOLD:
        return 1.0 - abs(len(a) - len(b)) / denom
    return 1.0 - _edit_distance(a, b) / denom


def _all_spans(n: int) -> list[Span]:
    return [Span(i, j) for i in range(n + 1) for j in range(i, n + 1)]


def _overlap(a: Span, b: Span) -> bool:
    return a.start < b.end and b.start < a.end


class OracleResolver:
    def __init__(self, d: DocumentState, scope: str = "all"):
        self.d = d
        self.text = d.content
        self.scope = scope
        self._like: dict[str, dict[Span, float]] = {}
        # Nodes are frozen dataclasses, so they key caches directly. Without
        # these, nested targets re-enumerate for every candidate span.
        self._resolved: dict[Constraint, list[tuple[Span, float]]] = {}
        self._targets: dict[Target, tuple[Span, ...]] = {}

    def like_table(self, pattern: str) -> dict[Span, float]:
        """Score every span of the document; threshold; suppress spans with a
        strictly better overlapping span."""
        if pattern in self._like:
            return self._like[pattern]
        scored = {}
        for span in _all_spans(len(self.text)):
            s = _score(self.text[span.start : span.end], pattern)
            if s >= LIKE_THRESHOLD:
                scored[span] = s
        kept = {
            span: s
            for span, s in scored.items()
            if not any(
                _overlap(span, other) and other_s > s
                for other, other_s in scored.items()
            )
        }
        self._like[pattern] = kept
        return kept

    def admit(self, c: Constraint, span: Span) -> float | None:
        head = c.head
        text = self.text
        piece = text[span.start : span.end]
        if head == "like":
            return self.like_table(c.args[0]).get(span)
        if head == "exactly":
            return 1.0 if piece == c.args[0] else None
        if head == "hasSubstring":
            return 1.0 if c.args[0] in piece else None
        if head == "startsWith":
            return 1.0 if piece.startswith(c.args[0]) else None
        if head == "endsWith":
            return 1.0 if piece.endswith(c.args[0]) else None
        if head in STRUCTURAL_HEADS:
            return 1.0 if span in UNIT_SPANS[head](text) else None
        if head == "empty":
            return 1.0 if span.start == span.end else None
        if head == "extra":
            return 1.0 if span in extra_spans(text) else None
        if head == "alwaysTrue":
            return 1.0
        if head == "atStart":
            return 1.0 if span.start == 0 and span.end == 0 else None
        if head == "atEnd":
            n = len(text)
            return 1.0 if span.start == n and span.end == n else None
        if head == "in":
            for a in self.target_spans(c.args[0]):
                if a.start <= span.start and span.end <= a.end:
                    return 1.0
            return None
        if head == "contains":
            for a in self.target_spans(c.args[0]):
                if span.start <= a.start and a.end <= span.end:
                    return 1.0
            return None
        if head == "before":
            best = None
            for a in self.target_spans(c.args[0]):
                if span.end <= a.start:
                    s = 1.0 / (1 + (a.start - span.end))
                    if best is None or s > best:
                        best = s
            return best
        if head == "after":
            best = None
            for a in self.target_spans(c.args[0]):
                if span.start >= a.end:
                    s = 1.0 / (1 + (span.start - a.end))
                    if best is None or s > best:
                        best = s
            return best
        if head == "between":
            best = None
            for a in self.target_spans(c.args[0]):
                for b in self.target_spans(c.args[1]):
                    if a.end <= span.start and span.end <= b.start:
                        gap = (span.start - a.end) + (b.start - span.end)
                        s = 1.0 / (1 + gap)
                        if best is None or s > best:
                            best = s
            return best
        if head == "nextTo":
            for a in self.target_spans(c.args[0]):
                if span.end == a.start or span.start == a.end:
                    return 1.0
            return None
        if head == "at":
            for a in self.target_spans(c.args[0]):
                if span.start == a.start and span.end == a.end:
                    return 1.0
            return None
        if head == "and":
            total = 1.0
            for child in c.args:
                s = self.admit(child, span)
                if s is None:
                    return None
                total *= s
            return total
        if head in ("or", "union"):
            best = None
            for child in c.args:
                s = self.admit(child, span)
                if s is not None and (best is None or s > best):
                    best = s
            return best
        raise AssertionError(f"oracle does not know head {head!r}")

    def _touch_references(self, c: Constraint) -> None:
        # Mirror the engine: every reference must resolve, even inside a
        # branch no span survives, so errors never depend on argument order.
        for arg in c.args:
            if isinstance(arg, Target):
                self.target_spans(arg)
            elif isinstance(arg, Constraint):
                self._touch_references(arg)

    def resolve(self, c: Constraint) -> list[tuple[Span, float]]:
        if c in self._resolved:
            return self._resolved[c]
        self._touch_references(c)
        if self.scope == "all":
            universe = _all_spans(len(self.text))
        else:
            universe = list(UNIT_SPANS[self.scope](self.text))
        admitted = []
        for span in universe:
            s = self.admit(c, span)
            if s is not None:
                admitted.append((span, s))
        focus = self.d.selection[1]
        admitted.sort(key=lambda item: (
            -item[1],
            _point_distance(item[0], focus),
            item[0].start,
            item[0].end,
        ))
        self._resolved[c] = admitted
        return admitted

    def target_spans(self, t: Target) -> tuple[Span, ...]:
        if t in self._targets:
            return self._targets[t]
        spans = self._target_spans(t)
        self._targets[t] = spans
        return spans

    def _target_spans(self, t: Target) -> tuple[Span, ...]:
        head = t.head
        if head in ("theText", "thePosition", "findAll"):
            index, constraint = None, t.args[0]
        else:
            index, constraint = t.args
        ranked = self.resolve(constraint)
        if not ranked:
            raise OracleUnresolvable(head)
        if head == "theText":
            return (ranked[0][0],)
        if head == "thePosition":
            for span, _ in ranked:
                if span.start == span.end:
                    return (span,)
            top = ranked[0][0]
            return (Span(top.start, top.start),)
        ordered = sorted((span for span, _ in ranked), key=lambda s: (s.start, s.end))
        if head == "findAll":
            return tuple(ordered)
        if index > len(ordered):
            raise OracleUnresolvable(head)
        if head == "nth":
            return (ordered[index - 1],)
        if head == "nthToLast":
            return (ordered[-index],)
        if head == "take":
            return tuple(ordered[:index])
        raise AssertionError(f"oracle does not know target head {head!r}")


def _point_distance(span: Span, offset: int) -> int:
    if span.start <= offset <= span.end:
        return 0
    return min(abs(span.start - offset), abs(span.end - offset))


def oracle_resolve(d: DocumentState, c: Constraint, scope: str = "all"):
    return OracleResolver(d, scope).resolve(c)

"""Structural text units and fuzzy match scoring.

Declared in exactly one place so every consumer — the resolution engine, the
executor, and any checking oracle — agrees on what a word, sentence, or match
score is.

Unit definitions:
  words          maximal alphanumeric runs
  letters        every single Unicode scalar value
  sentences      runs ending in .!? followed by whitespace or end of text;
                 trailing unterminated material counts as a sentence
  lines          newline-delimited, excluding the newline itself
  phrases        comma-delimited clauses within a sentence
  passages       blank-line-separated paragraphs
  parentheticals balanced (...) groups, parentheses included
  text chunks    maximal non-whitespace runs
"""

from __future__ import annotations

from ..document import Span

LIKE_THRESHOLD = 0.6
TERMINATORS = ".!?"


def word_spans(text: str) -> list[Span]:
    spans = []
    start = None
    for i, ch in enumerate(text):
        if ch.isalnum():
            if start is None:
                start = i
        elif start is not None:
            spans.append(Span(start, i))
            start = None
    if start is not None:
        spans.append(Span(start, len(text)))
    return spans


def letter_spans(text: str) -> list[Span]:
    return [Span(i, i + 1) for i in range(len(text))]


def sentence_spans(text: str) -> list[Span]:
    spans = []
    n = len(text)
    i = 0
    start = None
    while i < n:
        ch = text[i]
        if start is None and not ch.isspace():
            start = i
        if ch in TERMINATORS:
            j = i
            while j + 1 < n and text[j + 1] in TERMINATORS:
                j += 1
            if j + 1 >= n or text[j + 1].isspace():
                if start is not None:
                    spans.append(Span(start, j + 1))
                    start = None
            i = j + 1
            continue
        i += 1
    if start is not None:
        end = n
        while end > start and text[end - 1].isspace():
            end -= 1
        if end > start:
            spans.append(Span(start, end))
    return spans


def line_spans(text: str) -> list[Span]:
    spans = []
    start = 0
    for i, ch in enumerate(text):
        if ch == "\n":
            spans.append(Span(start, i))
            start = i + 1
    spans.append(Span(start, len(text)))
    return spans


def phrase_spans(text: str) -> list[Span]:
    spans = []
    for sentence in sentence_spans(text):
        start = sentence.start
        for i in range(sentence.start, sentence.end):
            if text[i] == ",":
                spans.append(_trimmed(text, start, i))
                start = i + 1
        spans.append(_trimmed(text, start, sentence.end))
    return [s for s in spans if s is not None]


def passage_spans(text: str) -> list[Span]:
    spans = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        if text[i] == "\n":
            j = i + 1
            while j < n and text[j] != "\n" and text[j].isspace():
                j += 1
            if j < n and text[j] == "\n":
                trimmed = _trimmed(text, start, i)
                if trimmed is not None:
                    spans.append(trimmed)
                while j < n and text[j].isspace():
                    j += 1
                start = j
                i = j
                continue
        i += 1
    trimmed = _trimmed(text, start, n)
    if trimmed is not None:
        spans.append(trimmed)
    return spans


def parenthetical_spans(text: str) -> list[Span]:
    spans = []
    stack = []
    for i, ch in enumerate(text):
        if ch == "(":
            stack.append(i)
        elif ch == ")" and stack:
            spans.append(Span(stack.pop(), i + 1))
    spans.sort()
    return spans


def chunk_spans(text: str) -> list[Span]:
    spans = []
    start = None
    for i, ch in enumerate(text):
        if not ch.isspace():
            if start is None:
                start = i
        elif start is not None:
            spans.append(Span(start, i))
            start = None
    if start is not None:
        spans.append(Span(start, len(text)))
    return spans


def _trimmed(text: str, start: int, end: int) -> Span | None:
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    if end <= start:
        return None
    return Span(start, end)


UNIT_SPANS = {
    "word": word_spans,
    "letter": letter_spans,
    "sentence": sentence_spans,
    "line": line_spans,
    "phrase": phrase_spans,
    "passage": passage_spans,
    "parenthetical": parenthetical_spans,
    "text": chunk_spans,
}


def extra_spans(text: str) -> list[Span]:
    """Surplus material: repeated adjacent words and multi-space runs.

    For "the the" the second word is the extra; for doubled spaces every
    space past the first in the run is.
    """
    spans = []
    words = word_spans(text)
    for prev, cur in zip(words, words[1:]):
        gap = text[prev.end : cur.start]
        if gap and gap.isspace():
            if text[prev.start : prev.end].lower() == text[cur.start : cur.end].lower():
                spans.append(cur)
    i = 0
    n = len(text)
    while i < n:
        if text[i] == " ":
            j = i
            while j < n and text[j] == " ":
                j += 1
            if j - i >= 2:
                spans.append(Span(i + 1, j))
            i = j
        else:
            i += 1
    spans.sort()
    return spans


# ---------------------------------------------------------------------------
# Fuzzy scoring
# ---------------------------------------------------------------------------


def levenshtein(a: str, b: str) -> int:
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(
                min(
                    prev[j] + 1,
                    cur[j - 1] + 1,
                    prev[j - 1] + (0 if ca == cb else 1),
                )
            )
        prev = cur
    return prev[-1]


def like_score(span_text: str, pattern: str) -> float:
    """1 - normalized Levenshtein distance over lowercase forms."""
    a = span_text.lower()
    b = pattern.lower()
    return 1.0 - levenshtein(a, b) / max(len(a), len(b), 1)


def like_length_bounds(pattern: str) -> tuple[int, int]:
    """Raw span lengths that could possibly clear LIKE_THRESHOLD.

    Scoring runs over lowercase forms, whose length difference alone bounds
    the edit distance, so admissible lowercase lengths sit in
    [threshold*|p|, |p|/threshold]. str.lower() can at most double a span
    (and never shrinks it), hence the halved lower bound; the extra slack
    keeps the bound safely conservative.
    """
    lp = len(pattern.lower())
    lo = max(int(LIKE_THRESHOLD * lp / 2) - 1, 0)
    hi = int(lp / LIKE_THRESHOLD) + 2
    return lo, hi


def like_matches(text: str, pattern: str) -> dict[Span, float]:
    """Every span admitted by `like`: score >= threshold and no overlapping
    span scoring strictly higher."""
    if not pattern.lower():
        return {Span(i, i): 1.0 for i in range(len(text) + 1)}
    lo, hi = like_length_bounds(pattern)
    scored: dict[Span, float] = {}
    for start in range(len(text)):
        for length in range(max(lo, 1), hi + 1):
            end = start + length
            if end > len(text):
                break
            score = like_score(text[start:end], pattern)
            if score >= LIKE_THRESHOLD:
                scored[Span(start, end)] = score
    items = list(scored.items())
    return {
        span: score
        for span, score in items
        if not any(span.overlaps(other) and other_score > score
                   for other, other_score in items)
    }


def render_letters(literal: str) -> str:
    """Collapse a spoken letter sequence: "K A T", "k-a-t", "c.a.t" -> "KAT"."""
    return "".join(ch for ch in literal if ch.isalnum() or ch == "'")

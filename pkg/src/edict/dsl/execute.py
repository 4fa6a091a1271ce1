"""Program execution: applying parsed commands to a document.

Each action resolves its targets against the current document, applies a span
edit, and leaves the selection covering the affected text so the change shows
up highlighted. `do` chains re-resolve against each intermediate state.
"""

from __future__ import annotations

from ..document import DocumentState, Span, apply_span_edit
from ..errors import ExecutionError
from . import units
from .ast import Action, Target
from .resolve import ResolutionContext, ResolvedTarget, _Resolver

CORRECTION_WINDOW = 120
CORRECTION_FLOOR = 0.3


def execute(
    program: Action, d: DocumentState, ctx: ResolutionContext | None = None
) -> DocumentState:
    """Run a program against a document and return the new state."""
    ctx = ctx or ResolutionContext()
    head = program.head
    args = program.args

    if head == "do":
        state = d
        for child in args:
            state = execute(child, state, ctx)
        return state

    resolver = _Resolver(d, ctx)

    if head in ("capitalize", "lowercase", "allCaps"):
        spans = resolver.target(args[0]).spans
        return _apply_each(d, spans, _CASE_TRANSFORMS[head])

    if head == "delete":
        return _delete(d, resolver.target(args[0]).spans)

    if head == "insert":
        literal = args[0]
        if len(args) == 2:
            at = _position(resolver.target(args[1]))
            return apply_span_edit(d, Span(at, at), literal)
        return apply_span_edit(d, d.selected_span, literal)

    if head == "replace":
        spans = resolver.target(args[0]).spans
        return _apply_each(d, spans, lambda _: args[1])

    if head == "move":
        return _move(d, resolver, args[0], args[1])

    if head == "moveCursor":
        span = resolver.target(args[0]).primary
        return DocumentState(d.content, (span.start, span.end))

    if head == "spell":
        return apply_span_edit(d, d.selected_span, units.render_letters(args[0]))

    if head == "respell":
        rendering = units.render_letters(args[1])
        spans = resolver.target(args[0]).spans
        return _apply_each(d, spans, lambda _: rendering)

    if head == "quote":
        spans = resolver.target(args[0]).spans
        return _apply_each(d, spans, lambda text: f'"{text}"')

    if head == "parenthesize":
        spans = resolver.target(args[0]).spans
        return _apply_each(d, spans, lambda text: f"({text})")

    if head == "combineSentences":
        anchor = resolver.target(args[0]).primary.start if args else None
        return _combine_sentences(d, anchor)

    if head == "combine":
        spans = resolver.target(args[0]).spans
        return _apply_each(d, spans, lambda text: "".join(text.split()))

    if head == "correction":
        if len(args) == 2:
            spans = resolver.target(args[0]).spans
            return _apply_each(d, spans, lambda _: args[1])
        return _correction(d, args[0])

    raise ExecutionError(f"unhandled action {head!r}")


_CASE_TRANSFORMS = {
    "capitalize": lambda text: text[:1].upper() + text[1:],
    "lowercase": str.lower,
    "allCaps": str.upper,
}


def _position(rt: ResolvedTarget) -> int:
    return rt.primary.start


def _apply_each(d: DocumentState, spans: tuple[Span, ...], transform) -> DocumentState:
    """Rewrite each target span with transform(old_text), right to left.

    The selection ends up covering the leftmost rewritten span.
    """
    ordered = sorted(spans, key=lambda s: (s.start, s.end))
    for a, b in zip(ordered, ordered[1:]):
        if a.end > b.start:
            raise ExecutionError("targets overlap; refusing to edit")
    content = d.content
    for span in reversed(ordered):
        content = (
            content[: span.start]
            + transform(d.content[span.start : span.end])
            + content[span.end :]
        )
    first = ordered[0]
    width = len(transform(d.content[first.start : first.end]))
    return DocumentState(content, (first.start, first.start + width))


def _join_span(content: str, span: Span) -> Span:
    """Widen a deletion span to absorb one adjacent space.

    Deleting a word should not leave doubled or dangling spaces; deleting
    whitespace itself is taken literally.
    """
    piece = content[span.start : span.end]
    if not piece or piece.isspace():
        return span
    left = content[span.start - 1] if span.start > 0 else None
    right = content[span.end] if span.end < len(content) else None
    if left == " " and right == " ":
        return Span(span.start, span.end + 1)
    if left is None and right == " ":
        return Span(span.start, span.end + 1)
    if right is None and left == " ":
        return Span(span.start - 1, span.end)
    return span


def _delete(d: DocumentState, spans: tuple[Span, ...]) -> DocumentState:
    ordered = sorted(spans, key=lambda s: (s.start, s.end))
    for a, b in zip(ordered, ordered[1:]):
        if a.end > b.start:
            raise ExecutionError("targets overlap; refusing to delete")
    content = d.content
    cursor = None
    # Right to left, re-deriving the space join against the evolving text.
    for span in reversed(ordered):
        widened = _join_span(content, span)
        content = content[: widened.start] + content[widened.end :]
        cursor = widened.start
    return DocumentState(content, (cursor, cursor))


def _move(d: DocumentState, resolver, source_target, dest_target) -> DocumentState:
    source = resolver.target(source_target)
    if len(source.spans) != 1:
        raise ExecutionError("move needs a single source span")
    src = source.spans[0]
    moved = d.content[src.start : src.end]
    dest = _position(resolver.target(dest_target))

    removed = _join_span(d.content, src)
    if removed.start <= dest <= removed.end:
        dest = removed.start
    elif dest > removed.end:
        dest -= len(removed)
    content = d.content[: removed.start] + d.content[removed.end :]

    before = content[:dest]
    after = content[dest:]
    lead = " " if before and not before[-1].isspace() and moved and not moved[0].isspace() else ""
    trail = " " if after and not after[0].isspace() and moved and not moved[-1].isspace() else ""
    content = before + lead + moved + trail + after
    start = dest + len(lead)
    return DocumentState(content, (start, start + len(moved)))


def _combine_sentences(d: DocumentState, anchor: int | None) -> DocumentState:
    sentences = units.sentence_spans(d.content)
    if len(sentences) < 2:
        raise ExecutionError("need two sentences to combine")
    if anchor is None:
        index = len(sentences) - 2
    else:
        index = None
        for i, span in enumerate(sentences):
            if span.start <= anchor <= span.end:
                index = i
                break
        if index is None:
            index = min(
                range(len(sentences)),
                key=lambda i: sentences[i].distance_to(anchor),
            )
        if index == len(sentences) - 1:
            index -= 1
    first, second = sentences[index], sentences[index + 1]

    head = d.content[first.start : first.end].rstrip()
    while head and head[-1] in units.TERMINATORS:
        head = head[:-1]
    head = head.rstrip()
    tail = d.content[second.start : second.end]
    tail = tail[:1].lower() + tail[1:]
    return apply_span_edit(d, Span(first.start, second.end), f"{head} {tail}")


def _correction(d: DocumentState, replacement: str) -> DocumentState:
    """Speech-repair: swap the best fuzzy match near the cursor for the
    replacement, or type it at the cursor when nothing comes close."""
    focus = d.focus
    window_start = max(0, focus - CORRECTION_WINDOW)
    window = d.content[window_start:focus]

    best = None  # (score, dist, start, end)
    target_len = max(len(replacement), 1)
    lo = max(int(CORRECTION_FLOOR * target_len) - 1, 1)
    hi = int(target_len / CORRECTION_FLOOR) + 2
    for i in range(len(window)):
        for length in range(lo, hi + 1):
            j = i + length
            if j > len(window):
                break
            score = units.like_score(window[i:j], replacement)
            if score < CORRECTION_FLOOR:
                continue
            span = Span(window_start + i, window_start + j)
            key = (-score, span.distance_to(focus), span.start, span.end)
            if best is None or key < best[0]:
                best = (key, span)
    if best is None:
        return apply_span_edit(d, d.selected_span, replacement)
    return apply_span_edit(d, best[1], replacement)

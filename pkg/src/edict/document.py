"""Document state and character-level edit scripts.

A document is plain Unicode text plus a selection. All offsets count Unicode
scalar values, never UTF-8 or UTF-16 code units, so slicing with Python string
indexing is always correct.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import BoundsError


@dataclass(frozen=True, order=True)
class Span:
    """Half-open character range [start, end) within a document."""

    start: int
    end: int

    def __post_init__(self):
        if self.start < 0 or self.end < self.start:
            raise BoundsError(f"invalid span [{self.start}, {self.end})")

    def __len__(self) -> int:
        return self.end - self.start

    def contains(self, other: "Span") -> bool:
        return self.start <= other.start and other.end <= self.end

    def overlaps(self, other: "Span") -> bool:
        return self.start < other.end and other.start < self.end

    def distance_to(self, offset: int) -> int:
        """Character distance from this span to a point; 0 when the point touches it."""
        if self.start <= offset <= self.end:
            return 0
        return min(abs(self.start - offset), abs(self.end - offset))


@dataclass(frozen=True)
class DocumentState:
    """Text plus selection. The selection is (anchor, focus); a collapsed
    selection (anchor == focus) is a cursor."""

    content: str = ""
    selection: tuple[int, int] = (0, 0)

    def __post_init__(self):
        anchor, focus = self.selection
        limit = len(self.content)
        if not (0 <= anchor <= limit and 0 <= focus <= limit):
            raise BoundsError(
                f"selection {self.selection} outside document of length {limit}"
            )

    @property
    def focus(self) -> int:
        return self.selection[1]

    @property
    def selected_span(self) -> Span:
        anchor, focus = self.selection
        return Span(min(anchor, focus), max(anchor, focus))

    def to_json(self) -> dict:
        return {"content": self.content, "selection": list(self.selection)}

    @classmethod
    def from_json(cls, obj: dict) -> "DocumentState":
        sel = obj.get("selection", [0, 0])
        return cls(content=obj["content"], selection=(int(sel[0]), int(sel[1])))


def state_match(a: DocumentState, b: DocumentState) -> bool:
    """Exact content equality. The cursor is presentation state and is ignored."""
    return a.content == b.content


def insert_dictation(d: DocumentState, text: str) -> DocumentState:
    """Splice dictated text over the current selection, exactly as transcribed.

    No spacing is adjusted here: the caller owns separators. The cursor lands
    immediately after the inserted text.
    """
    span = d.selected_span
    content = d.content[: span.start] + text + d.content[span.end :]
    cursor = span.start + len(text)
    return DocumentState(content, (cursor, cursor))


def apply_span_edit(d: DocumentState, span: Span, replacement: str) -> DocumentState:
    """Replace [span.start, span.end) with replacement.

    The resulting selection covers the replacement, so edited text shows up
    highlighted. Raises BoundsError when the span exceeds the document.
    """
    if span.end > len(d.content):
        raise BoundsError(
            f"span [{span.start}, {span.end}) outside document of length {len(d.content)}"
        )
    content = d.content[: span.start] + replacement + d.content[span.end :]
    return DocumentState(content, (span.start, span.start + len(replacement)))


# ---------------------------------------------------------------------------
# Edit scripts
# ---------------------------------------------------------------------------

# An op is ("retain", n), ("delete", n), or ("insert", text).
EditOp = tuple[str, object]


@dataclass(frozen=True)
class EditScript:
    """Ordered retain/delete/insert ops transforming one text into another."""

    ops: tuple[EditOp, ...] = ()

    def to_json(self) -> list[dict]:
        return [{kind: value} for kind, value in self.ops]

    @classmethod
    def from_json(cls, items: list[dict]) -> "EditScript":
        ops = []
        for item in items:
            (kind, value), = item.items()
            if kind not in ("retain", "delete", "insert"):
                raise ValueError(f"unknown edit op {kind!r}")
            ops.append((kind, value))
        return cls(tuple(ops))

    @property
    def cost(self) -> int:
        """Characters deleted plus characters inserted."""
        total = 0
        for kind, value in self.ops:
            if kind == "delete":
                total += value
            elif kind == "insert":
                total += len(value)
        return total

    def apply(self, text: str) -> str:
        """Run the script against a source text of exactly the right length."""
        out = []
        pos = 0
        for kind, value in self.ops:
            if kind == "retain":
                if pos + value > len(text):
                    raise BoundsError("retain past end of text")
                out.append(text[pos : pos + value])
                pos += value
            elif kind == "delete":
                if pos + value > len(text):
                    raise BoundsError("delete past end of text")
                pos += value
            else:
                out.append(value)
        if pos != len(text):
            raise BoundsError(
                f"script consumed {pos} of {len(text)} source characters"
            )
        return "".join(out)


def diff_text(a: str, b: str) -> EditScript:
    """Minimal character-level edit script turning a into b.

    Common prefix and suffix are stripped first, then an LCS alignment covers
    the middle. Deletes always precede inserts at the same position, adjacent
    ops of one kind are merged, and zero-length ops are dropped, so equal
    inputs always produce identical scripts.
    """
    prefix = 0
    max_prefix = min(len(a), len(b))
    while prefix < max_prefix and a[prefix] == b[prefix]:
        prefix += 1
    suffix = 0
    max_suffix = min(len(a), len(b)) - prefix
    while suffix < max_suffix and a[len(a) - 1 - suffix] == b[len(b) - 1 - suffix]:
        suffix += 1

    mid_a = a[prefix : len(a) - suffix]
    mid_b = b[prefix : len(b) - suffix]

    ops: list[EditOp] = []
    if prefix:
        ops.append(("retain", prefix))
    ops.extend(_align(mid_a, mid_b))
    if suffix:
        ops.append(("retain", suffix))
    return EditScript(tuple(_merge(ops)))


def diff(d_pre: DocumentState, d_post: DocumentState) -> EditScript:
    """Edit script between two document states (content only)."""
    return diff_text(d_pre.content, d_post.content)


def _align(a: str, b: str) -> list[EditOp]:
    """LCS alignment of two strings with no common prefix/suffix."""
    if not a and not b:
        return []
    if not a:
        return [("insert", b)]
    if not b:
        return [("delete", len(a))]

    m, n = len(a), len(b)
    # dp[i][j] = LCS length of a[:i], b[:j]
    dp = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(1, m + 1):
        row = dp[i]
        prev = dp[i - 1]
        ca = a[i - 1]
        for j in range(1, n + 1):
            if ca == b[j - 1]:
                row[j] = prev[j - 1] + 1
            else:
                up = prev[j]
                left = row[j - 1]
                row[j] = up if up >= left else left

    # Backtrack from the end; ops come out reversed. Consuming inserts before
    # deletes here yields deletes-before-inserts in forward order.
    rev: list[EditOp] = []
    i, j = m, n
    while i > 0 or j > 0:
        if i > 0 and j > 0 and a[i - 1] == b[j - 1] and dp[i][j] == dp[i - 1][j - 1] + 1:
            rev.append(("retain", 1))
            i -= 1
            j -= 1
        elif j > 0 and (i == 0 or dp[i][j - 1] == dp[i][j]):
            rev.append(("insert", b[j - 1]))
            j -= 1
        else:
            rev.append(("delete", 1))
            i -= 1
    return list(reversed(rev))


def _merge(ops: list[EditOp]) -> list[EditOp]:
    merged: list[EditOp] = []
    for kind, value in ops:
        if (kind == "retain" or kind == "delete") and not value:
            continue
        if kind == "insert" and not value:
            continue
        if merged and merged[-1][0] == kind:
            prev = merged[-1][1]
            merged[-1] = (kind, prev + value)
        else:
            merged.append((kind, value))
    return merged

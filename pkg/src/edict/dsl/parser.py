"""Reader and printer for the command language.

The surface syntax is s-expressions over a closed head registry. parse and
print_canonical are inverses: parse(print_canonical(p)) == p for every valid
program, and print_canonical emits the one canonical rendering (single spaces,
double-quoted literals with minimal escapes).
"""

from __future__ import annotations

from . import registry
from .ast import Action, Arg, Constraint, Target
from ..errors import ParseError

_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "t": "\t"}
_REVERSE_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t"}


class _Token:
    __slots__ = ("kind", "value", "pos")

    def __init__(self, kind: str, value, pos: int):
        self.kind = kind  # "(", ")", "string", "int", "symbol"
        self.value = value
        self.pos = pos


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch.isspace():
            i += 1
        elif ch == "(" or ch == ")":
            tokens.append(_Token(ch, ch, i))
            i += 1
        elif ch == '"':
            start = i
            i += 1
            buf = []
            while True:
                if i >= n:
                    raise ParseError("unterminated string literal", start)
                ch = source[i]
                if ch == '"':
                    i += 1
                    break
                if ch == "\\":
                    if i + 1 >= n:
                        raise ParseError("unterminated escape", i)
                    esc = source[i + 1]
                    if esc not in _ESCAPES:
                        raise ParseError(f"unknown escape \\{esc}", i)
                    buf.append(_ESCAPES[esc])
                    i += 2
                else:
                    buf.append(ch)
                    i += 1
            tokens.append(_Token("string", "".join(buf), start))
        elif ch.isdigit():
            start = i
            while i < n and source[i].isdigit():
                i += 1
            tokens.append(_Token("int", int(source[start:i]), start))
        elif ch.isalpha():
            start = i
            while i < n and (source[i].isalnum()):
                i += 1
            tokens.append(_Token("symbol", source[start:i], start))
        else:
            raise ParseError(f"unexpected character {ch!r}", i)
    return tokens


_CODE_FOR_TYPE = {Action: "A", Target: "T", Constraint: "C"}
_KIND_NAMES = {"A": "an action", "T": "a target", "C": "a constraint",
               "L": "a string literal", "I": "an integer"}


def _arg_code(arg: Arg) -> str:
    if isinstance(arg, str):
        return "L"
    if isinstance(arg, int):
        return "I"
    return _CODE_FOR_TYPE[type(arg)]


def _check_signature(head: str, args: tuple[Arg, ...], pos: int) -> None:
    codes = tuple(_arg_code(a) for a in args)
    variadic = registry.VARIADIC.get(head)
    if variadic is not None:
        element, minimum = variadic
        if len(codes) < minimum:
            raise ParseError(f"{head} needs at least {minimum} children", pos)
        for code in codes:
            if code != element:
                raise ParseError(
                    f"{head} children must each be {_KIND_NAMES[element]}", pos
                )
        return
    for table in (
        registry.ACTION_SIGNATURES,
        registry.TARGET_SIGNATURES,
        registry.CONSTRAINT_SIGNATURES,
    ):
        if head in table:
            if codes in table[head]:
                return
            expected = " or ".join(
                "(" + " ".join(sig) + ")" for sig in table[head]
            )
            raise ParseError(
                f"{head} takes {expected or '()'}, got ({' '.join(codes)})", pos
            )
    raise ParseError(f"unknown head {head!r}", pos)


class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.index = 0
        self.end = len(source)

    def peek(self) -> _Token | None:
        return self.tokens[self.index] if self.index < len(self.tokens) else None

    def next(self) -> _Token:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", self.end)
        self.index += 1
        return tok

    def parse_expr(self) -> Arg:
        tok = self.next()
        if tok.kind == "string":
            return tok.value
        if tok.kind == "int":
            return tok.value
        if tok.kind == ")":
            raise ParseError("unexpected )", tok.pos)
        if tok.kind != "(":
            raise ParseError(f"unexpected token {tok.value!r}", tok.pos)

        head_tok = self.next()
        if head_tok.kind != "symbol":
            raise ParseError("expected a head symbol after (", head_tok.pos)
        head = head_tok.value
        kind = registry.kind_of(head)
        if kind is None:
            raise ParseError(f"unknown head {head!r}", head_tok.pos)

        args: list[Arg] = []
        while True:
            tok = self.peek()
            if tok is None:
                raise ParseError("missing )", self.end)
            if tok.kind == ")":
                self.index += 1
                break
            args.append(self.parse_expr())

        _check_signature(head, tuple(args), head_tok.pos)
        for arg in args:
            if isinstance(arg, int) and arg < 1:
                raise ParseError(f"{head} index must be >= 1", head_tok.pos)

        if kind == registry.ACTION:
            return Action(head, tuple(args))
        if kind == registry.TARGET:
            return Target(head, tuple(args))
        return Constraint(head, tuple(args))


def parse_program(source: str) -> Action:
    """Parse source into a program. Raises ParseError with the byte offset."""
    parser = _Parser(source)
    if parser.peek() is None:
        raise ParseError("empty input", 0)
    node = parser.parse_expr()
    trailing = parser.peek()
    if trailing is not None:
        raise ParseError("trailing content after program", trailing.pos)
    if not isinstance(node, Action):
        raise ParseError("a program must start with an action", 0)
    return node


def _quote(value: str) -> str:
    out = ['"']
    for ch in value:
        out.append(_REVERSE_ESCAPES.get(ch, ch))
    out.append('"')
    return "".join(out)


def print_canonical(node: Arg) -> str:
    """The single canonical rendering of an expression."""
    if isinstance(node, str):
        return _quote(node)
    if isinstance(node, int):
        return str(node)
    if not node.args:
        return f"({node.head})"
    rendered = " ".join(print_canonical(a) for a in node.args)
    return f"({node.head} {rendered})"


def program_match(a: Action, b: Action) -> bool:
    """Exact-match on programs: equal canonical renderings."""
    return print_canonical(a) == print_canonical(b)

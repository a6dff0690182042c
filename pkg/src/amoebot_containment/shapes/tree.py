"""Snowflake trees and their parenthesized text form.

Grammar::

    shape := "(line" DIR NAT ")" | "(tri" DIR POS ")"
           | "(union" shape shape+ ")"
           | "(sum" DIR POS shape ")" | "(shift" DIR POS shape ")"

``#`` starts a comment running to the end of the line.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

from ..trigrid import UNIT, Direction
from .core import (
    Shape,
    axis_width,
    make_line,
    make_triangle,
    minkowski_with_line,
    translate_shape,
    union_shapes,
)

MAX_LENGTH = 2**20


class TreeError(ValueError):
    pass


class SnowflakeSyntaxError(TreeError):
    def __init__(self, position: int, expected: str, found: str):
        self.position = position
        self.expected = expected
        self.found = found
        super().__init__(f"at offset {position}: expected {expected}, found {found!r}")


class InvalidShift(TreeError):
    pass


class ArityError(TreeError):
    pass


class RangeError(TreeError):
    pass


class Kind(str, Enum):
    LINE = "line"
    TRI = "tri"
    UNION = "union"
    SUM = "sum"
    SHIFT = "shift"


@dataclass(frozen=True)
class SnowflakeTree:
    kind: Kind
    direction: Direction | None = None
    length: int = 0
    children: tuple["SnowflakeTree", ...] = ()

    def __str__(self) -> str:
        return serialize_snowflake(self)

    def nodes_postorder(self) -> list["SnowflakeTree"]:
        """Leaves before parents; children in left-to-right order."""
        out: list[SnowflakeTree] = []

        def visit(t: SnowflakeTree) -> None:
            for c in t.children:
                visit(c)
            out.append(t)

        visit(self)
        return out

    def size(self) -> int:
        return len(self.nodes_postorder())

    def rotated(self, r: int) -> "SnowflakeTree":
        return rotate_tree(self, r)


def line(d, length: int) -> SnowflakeTree:
    return SnowflakeTree(Kind.LINE, Direction(d), length)


def tri(d, length: int) -> SnowflakeTree:
    return SnowflakeTree(Kind.TRI, Direction(d), length)


def union(*children: SnowflakeTree) -> SnowflakeTree:
    return SnowflakeTree(Kind.UNION, None, 0, tuple(children))


def ssum(d, length: int, child: SnowflakeTree) -> SnowflakeTree:
    return SnowflakeTree(Kind.SUM, Direction(d), length, (child,))


def shift(d, length: int, child: SnowflakeTree) -> SnowflakeTree:
    return SnowflakeTree(Kind.SHIFT, Direction(d), length, (child,))


def rotate_tree(t: SnowflakeTree, r: int) -> SnowflakeTree:
    r %= 6
    if r == 0:
        return t
    d = t.direction.ccw(r) if t.direction is not None else None
    return SnowflakeTree(t.kind, d, t.length, tuple(rotate_tree(c, r) for c in t.children))


def serialize_snowflake(t: SnowflakeTree) -> str:
    if t.kind is Kind.UNION:
        return "(union " + " ".join(serialize_snowflake(c) for c in t.children) + ")"
    head = f"({t.kind.value} {t.direction.name} {t.length}"
    if t.children:
        return head + " " + serialize_snowflake(t.children[0]) + ")"
    return head + ")"


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens: list[tuple[str, int]] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
        elif c.isspace():
            i += 1
        elif c in "()":
            tokens.append((c, i))
            i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "()#":
                j += 1
            tokens.append((text[i:j], i))
            i = j
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, int]:
        if self.i < len(self.tokens):
            return self.tokens[self.i]
        return ("<end of input>", len(self.text))

    def take(self, expected: str) -> tuple[str, int]:
        tok = self.peek()
        if tok[0] == "<end of input>":
            raise SnowflakeSyntaxError(tok[1], expected, tok[0])
        self.i += 1
        return tok

    def expect(self, literal: str) -> None:
        tok, pos = self.peek()
        if tok != literal:
            raise SnowflakeSyntaxError(pos, repr(literal), tok)
        self.i += 1

    def direction(self) -> Direction:
        tok, pos = self.take("direction")
        try:
            return Direction[tok]
        except KeyError:
            raise SnowflakeSyntaxError(pos, "direction (E|NE|NW|W|SW|SE)", tok) from None

    def number(self, minimum: int) -> int:
        tok, pos = self.take("integer")
        if not tok.isdigit():
            raise SnowflakeSyntaxError(pos, "non-negative integer", tok)
        value = int(tok)
        if value < minimum or value > MAX_LENGTH:
            raise RangeError(f"at offset {pos}: length {value} outside {minimum}..{MAX_LENGTH}")
        return value

    def shape(self) -> SnowflakeTree:
        self.expect("(")
        tok, pos = self.take("shape keyword")
        try:
            kind = Kind(tok)
        except ValueError:
            raise SnowflakeSyntaxError(pos, "one of line|tri|union|sum|shift", tok) from None
        if kind is Kind.UNION:
            children = []
            while self.peek()[0] == "(":
                children.append(self.shape())
            if len(children) < 2:
                raise ArityError(f"at offset {pos}: union needs at least 2 children, got {len(children)}")
            self.expect(")")
            return SnowflakeTree(kind, None, 0, tuple(children))
        d = self.direction()
        length = self.number(0 if kind is Kind.LINE else 1)
        children = []
        while self.peek()[0] == "(":
            children.append(self.shape())
        want = 0 if kind in (Kind.LINE, Kind.TRI) else 1
        if len(children) != want:
            raise ArityError(f"at offset {pos}: {kind.value} takes {want} child shape(s), got {len(children)}")
        self.expect(")")
        return SnowflakeTree(kind, d, length, tuple(children))


def parse_snowflake(text: str) -> SnowflakeTree:
    p = _Parser(text)
    t = p.shape()
    tok, pos = p.peek()
    if tok != "<end of input>":
        raise SnowflakeSyntaxError(pos, "end of input", tok)
    validate_tree(t)
    return t


def validate_tree(t: SnowflakeTree) -> None:
    """Check arity, length bounds and the width guard of shift nodes."""
    for v in t.nodes_postorder():
        if v.kind in (Kind.LINE, Kind.TRI):
            if v.children:
                raise ArityError(f"{v.kind.value} is a leaf")
        elif v.kind is Kind.UNION:
            if len(v.children) < 2:
                raise ArityError("union needs at least 2 children")
        elif len(v.children) != 1:
            raise ArityError(f"{v.kind.value} takes exactly one child")
        if v.kind is not Kind.UNION and v.direction is None:
            raise TreeError(f"{v.kind.value} needs a direction")
        low = 0 if v.kind in (Kind.LINE, Kind.UNION) else 1
        if not low <= v.length <= MAX_LENGTH:
            raise RangeError(f"{v.kind.value} length {v.length} outside {low}..{MAX_LENGTH}")
        if v.kind is Kind.SHIFT:
            child = eval_tree(v.children[0])
            if axis_width(child, v.direction.axis) <= 0:
                raise InvalidShift(
                    f"shift along {v.direction.name}: child has width 0 on axis {v.direction.axis.name}"
                )


@lru_cache(maxsize=4096)
def eval_tree(t: SnowflakeTree) -> Shape:
    if t.kind is Kind.LINE:
        return make_line(t.direction, t.length)
    if t.kind is Kind.TRI:
        return make_triangle(t.direction, t.length)
    if t.kind is Kind.UNION:
        return union_shapes(*(eval_tree(c) for c in t.children))
    child = eval_tree(t.children[0])
    if t.kind is Kind.SUM:
        return minkowski_with_line(child, t.direction, t.length)
    moved = translate_shape(child, UNIT[t.direction] * t.length)
    return union_shapes(moved, make_line(t.direction, t.length))

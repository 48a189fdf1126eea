"""Tokenizer-free recursive-descent parsing of atoms and atom lists."""

from __future__ import annotations

import re
from typing import List, Tuple

from .logic import Atom, Conjunction

_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*")
_WS = re.compile(r"\s*")


class ParseError(ValueError):
    def __init__(self, message: str, text: str = "", pos: int = 0):
        super().__init__(f"{message} at position {pos}" + (f": {text!r}" if text else ""))
        self.pos = pos


class Cursor:
    def __init__(self, text: str, pos: int = 0):
        self.text = text
        self.pos = pos

    def skip_ws(self) -> None:
        self.pos = _WS.match(self.text, self.pos).end()

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos:self.pos + 1]

    def expect(self, literal: str) -> None:
        self.skip_ws()
        if not self.text.startswith(literal, self.pos):
            self.fail(f"expected {literal!r}")
        self.pos += len(literal)

    def accept(self, literal: str) -> bool:
        self.skip_ws()
        if self.text.startswith(literal, self.pos):
            self.pos += len(literal)
            return True
        return False

    def ident(self) -> str:
        self.skip_ws()
        m = _IDENT.match(self.text, self.pos)
        if not m:
            self.fail("expected identifier")
        self.pos = m.end()
        return m.group()

    def fail(self, message: str) -> None:
        raise ParseError(message, self.text, self.pos)


def read_atom(cur: Cursor) -> Atom:
    name = cur.ident()
    if not name[0].islower():
        cur.fail(f"relation name {name!r} must start with a lower-case letter")
    args: List[str] = []
    if cur.accept("("):
        if not cur.accept(")"):
            args.append(cur.ident())
            while cur.accept(","):
                args.append(cur.ident())
            cur.expect(")")
    return Atom(name, tuple(args))


def read_atoms(cur: Cursor, stop: Tuple[str, ...] = ()) -> Conjunction:
    """Comma separated atoms, possibly empty when the next token is a stop word."""
    cur.skip_ws()
    if cur.at_end() or any(cur.text.startswith(s, cur.pos) for s in stop):
        return ()
    out = [read_atom(cur)]
    while cur.accept(","):
        out.append(read_atom(cur))
    return tuple(out)


def read_bracketed(cur: Cursor) -> Conjunction:
    cur.expect("[")
    atoms = read_atoms(cur, stop=("]",))
    cur.expect("]")
    return atoms


def parse_atoms(text: str) -> Conjunction:
    """Parse ``a(X), b(c)`` or ``[a(X), b(c)]``."""
    cur = Cursor(text)
    out = read_bracketed(cur) if cur.peek() == "[" else read_atoms(cur)
    if not cur.at_end():
        cur.fail("trailing input")
    return out


def parse_atom(text: str) -> Atom:
    cur = Cursor(text)
    a = read_atom(cur)
    if not cur.at_end():
        cur.fail("trailing input")
    return a

"""Step-bounded probabilistic formulae ``P>=alpha F<=k phi`` and ``P>=alpha G<=k phi``."""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

from .logic import Conjunction, Schema, SortError, iter_matchers, render_conjunction, renumber
from .syntax import Cursor, ParseError, read_bracketed


class PathOp(str, Enum):
    F = "F"
    G = "G"


@dataclass(frozen=True)
class Formula:
    alpha: float
    k: int
    op: PathOp
    phi: Conjunction

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"threshold {self.alpha} outside [0, 1]")
        if self.k < 0:
            raise ValueError("step bound must be non-negative")
        object.__setattr__(self, "op", PathOp(self.op))
        object.__setattr__(self, "phi", tuple(self.phi))

    def __str__(self) -> str:
        return render_formula(self)

    def with_op(self, op: PathOp) -> "Formula":
        return replace(self, op=PathOp(op))

    def with_phi(self, phi: Conjunction) -> "Formula":
        return replace(self, phi=tuple(phi))


def formula_length(psi: Formula) -> int:
    return len(psi.phi)


def _fmt_alpha(alpha: float) -> str:
    text = repr(float(alpha))
    return text[:-2] if text.endswith(".0") else text


def render_formula(psi: Formula) -> str:
    return f"P>={_fmt_alpha(psi.alpha)} {psi.op.value}<={psi.k} {render_conjunction(psi.phi)}"


_FLOAT = re.compile(r"[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?")
_INT = re.compile(r"[0-9]+")


def parse_formula(text: str, schema: Optional[Schema] = None) -> Formula:
    cur = Cursor(text)
    cur.skip_ws()
    if cur.text.startswith("P<=", cur.pos) or cur.text.startswith("P<", cur.pos):
        cur.fail("upper-bound probability operators are not supported")
    cur.expect("P>=")
    m = _FLOAT.match(text, cur.pos)
    if not m:
        cur.fail("expected probability threshold")
    alpha = float(m.group())
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"threshold {alpha} outside [0, 1]")
    cur.pos = m.end()
    op = cur.ident()
    if op not in ("F", "G"):
        cur.fail(f"unknown path operator {op!r}")
    cur.expect("<=")
    cur.skip_ws()
    m = _INT.match(text, cur.pos)
    if not m:
        cur.fail("expected integer step bound")
    k = int(m.group())
    cur.pos = m.end()
    phi = read_bracketed(cur)
    if not cur.at_end():
        cur.fail("trailing input")
    psi = Formula(alpha, k, PathOp(op), phi)
    if schema is not None:
        check_formula(psi, schema)
    return psi


def check_formula(psi: Formula, schema: Schema) -> None:
    for a in psi.phi:
        if schema.relation(a.rel).kind != "state":
            raise SortError(f"{a}: action relations cannot appear in state formulae")
    schema.check(psi.phi)


def refines_phi(child: Conjunction, parent: Conjunction) -> bool:
    """``child`` is OI-subsumed by ``parent`` with the child's variables frozen."""
    return next(iter_matchers(parent, child), None) is not None


def syntactic_refines(child: Formula, parent: Formula) -> bool:
    """Sufficient syntactic certificate that ``child`` is at least as specific as ``parent``."""
    if child.alpha != parent.alpha or child.k != parent.k:
        raise ValueError("syntactic_refines requires equal threshold and step bound")
    if child.op == parent.op or (child.op == PathOp.G and parent.op == PathOp.F):
        return refines_phi(child.phi, parent.phi)
    return False


def rename_apart(phi: Conjunction, prefix: str = "X", start: int = 0) -> Conjunction:
    """Rename variables to ``X0, X1, ...`` by first occurrence."""
    return renumber(phi, prefix=prefix, start=start)


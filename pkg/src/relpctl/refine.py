"""Refinement operator: lengthening, unification, instantiation, globalization.

Each formula is reachable along exactly one path because refinements are
applied in fixed phases (all lengthenings, then unifications, then
instantiations, then at most one globalization) and each phase follows a
frontier rule:

* lengthening only appends relations not smaller than the last one,
* unification replaces a not-yet-unified variable by an earlier variable, and
  only when no already-unified variable occurs to its right,
* instantiation proceeds left to right by leftmost occurrence.

Children with a non-canonical state formula are still returned (flagged), so
that canonical formulae reachable only through them stay reachable; the
learner never checks or reports them on their own.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Dict, List, Optional, Sequence

from .formula import Formula, PathOp
from .logic import Atom, Conjunction, IntegrityConstraint, Schema, is_canonical, is_sensible, is_var


class Phase(IntEnum):
    LEN = 0
    UNI = 1
    INS = 2
    GLO = 3


@dataclass(frozen=True)
class CandidateNode:
    formula: Formula
    phase: Phase = Phase.LEN
    depth: int = 0
    canonical: bool = True

    @property
    def phi(self) -> Conjunction:
        return self.formula.phi

    @property
    def length(self) -> int:
        return len(self.formula.phi)

    def child(self, phi: Conjunction, phase: Phase, op: Optional[PathOp] = None) -> "CandidateNode":
        f = Formula(self.formula.alpha, self.formula.k, op or self.formula.op, phi)
        return CandidateNode(f, phase, self.depth + 1)


@dataclass
class SearchStats:
    candidates: int = 0
    pruned_subsumption: int = 0
    pruned_irrelevant: int = 0
    pruned_semantic: int = 0

    def merge(self, other: "SearchStats") -> None:
        self.candidates += other.candidates
        self.pruned_subsumption += other.pruned_subsumption
        self.pruned_irrelevant += other.pruned_irrelevant
        self.pruned_semantic += other.pruned_semantic

    def as_dict(self) -> Dict[str, int]:
        return {"candidates": self.candidates, "pruned_subsumption": self.pruned_subsumption,
                "pruned_irrelevant": self.pruned_irrelevant, "pruned_semantic": self.pruned_semantic}


def top_node(alpha: float = 1.0, k: int = 0) -> CandidateNode:
    return CandidateNode(Formula(alpha, k, PathOp.F, ()))


def _slots(phi: Conjunction) -> List[str]:
    return [t for a in phi for t in a.args]


def _rebuild(phi: Conjunction, old: str, new: str) -> Conjunction:
    return tuple(Atom(a.rel, tuple(new if t == old else t for t in a.args)) for a in phi)


def lengthen(n: CandidateNode, order: Sequence[str], arities: Dict[str, int],
             max_len: Optional[int] = None) -> List[CandidateNode]:
    if n.phase != Phase.LEN or (max_len is not None and n.length >= max_len):
        return []
    start = order.index(n.phi[-1].rel) if n.phi else 0
    fresh = len(_slots(n.phi))
    out = []
    for rel in order[start:]:
        args = tuple(f"X{fresh + i + 1}" for i in range(arities[rel]))
        out.append(n.child(n.phi + (Atom(rel, args),), Phase.LEN))
    return out


def unify_step(n: CandidateNode, schema: Optional[Schema] = None) -> List[CandidateNode]:
    if n.phase > Phase.UNI:
        return []
    slots = _slots(n.phi)
    count: Dict[str, int] = {}
    first: Dict[str, int] = {}
    for i, t in enumerate(slots):
        count[t] = count.get(t, 0) + 1
        first.setdefault(t, i)
    unified_positions = [i for i, t in enumerate(slots) if is_var(t) and count[t] > 1]
    frontier = max(unified_positions, default=-1)
    doms = schema.var_domains(n.phi) if schema is not None else None
    earlier = sorted((i, t) for t, i in first.items() if is_var(t))
    out = []
    for p, v in enumerate(slots):
        if not is_var(v) or count[v] != 1 or p <= frontier:
            continue
        for fu, u in earlier:
            if fu >= p:
                break
            if doms is not None and not (doms[u] & doms[v]):
                continue
            out.append(n.child(_rebuild(n.phi, v, u), Phase.UNI))
    return out


def instantiate_step(n: CandidateNode, schema: Schema) -> List[CandidateNode]:
    if n.phase > Phase.INS:
        return []
    slots = _slots(n.phi)
    first: Dict[str, int] = {}
    for i, t in enumerate(slots):
        first.setdefault(t, i)
    present = {t for t in slots if not is_var(t)}
    frontier = max((i for t, i in first.items() if not is_var(t)), default=-1)
    doms = schema.var_domains(n.phi)
    out = []
    for v, pos in sorted(((t, i) for t, i in first.items() if is_var(t)), key=lambda x: x[1]):
        if pos <= frontier:
            continue
        for c in sorted(doms[v] - present):
            out.append(n.child(_rebuild(n.phi, v, c), Phase.INS))
    return out


def globalize(n: CandidateNode) -> Optional[CandidateNode]:
    if n.formula.op != PathOp.F or not n.phi:
        return None
    return n.child(n.phi, Phase.GLO, PathOp.G)


@dataclass
class Refiner:
    """Bundles the operator with the schema, constraints and search limits of one run."""

    schema: Schema
    constraints: Sequence[IntegrityConstraint]
    order: Sequence[str]
    max_len: int
    instantiation: bool = True
    arities: Dict[str, int] = field(init=False)

    def __post_init__(self):
        self.order = list(self.order)
        self.arities = {r: self.schema.relation(r).arity for r in self.order}

    def raw_children(self, n: CandidateNode, structural_only: bool = False) -> List[CandidateNode]:
        """All operator outputs; ``structural_only`` keeps lengthenings and unifications."""
        if n.phase == Phase.GLO:
            return []
        out = lengthen(n, self.order, self.arities, self.max_len)
        if n.phi:
            out += unify_step(n, self.schema)
            if structural_only:
                return out
            if self.instantiation:
                out += instantiate_step(n, self.schema)
            g = globalize(n)
            if g is not None:
                out.append(g)
        return out

    def refine(self, n: CandidateNode, stats: Optional[SearchStats] = None,
               structural_only: bool = False) -> List[CandidateNode]:
        """Children that pass the sensibility filter; non-canonical ones are flagged."""
        stats = stats if stats is not None else SearchStats()
        out = []
        for c in self.raw_children(n, structural_only):
            if c.phase == Phase.GLO:
                out.append(CandidateNode(c.formula, c.phase, c.depth, n.canonical))
                if not n.canonical:
                    stats.pruned_semantic += 1
                continue
            if len(set(c.phi)) != len(c.phi):
                stats.pruned_semantic += 1
                continue
            if not is_sensible(c.phi, self.constraints, self.schema):
                stats.pruned_irrelevant += 1
                continue
            canonical = is_canonical(c.phi)
            if not canonical:
                stats.pruned_semantic += 1
            out.append(CandidateNode(c.formula, c.phase, c.depth, canonical))
        return out

    def roots(self, alpha: float, k: int, stats: Optional[SearchStats] = None) -> List[CandidateNode]:
        return self.refine(top_node(alpha, k), stats) if self.max_len >= 1 else []

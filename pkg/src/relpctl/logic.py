"""Terms, atoms, conjunctions, substitutions and OI-subsumption.

Terms are plain strings: a leading upper-case letter marks a variable,
anything else is a constant.  Sorts are attached through a :class:`Schema`
that maps every argument position of every relation to a sort, and every
sort to the finite set of constants belonging to it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Tuple


class SortError(ValueError):
    """Raised when a term does not fit the sort of its argument position."""


def is_var(term: str) -> bool:
    return term[:1].isupper()


class Atom(NamedTuple):
    rel: str
    args: Tuple[str, ...] = ()

    def __str__(self) -> str:
        return f"{self.rel}({','.join(self.args)})"


Conjunction = Tuple[Atom, ...]
Substitution = Dict[str, str]


def atom(rel: str, *args: str) -> Atom:
    return Atom(rel, tuple(args))


def render_conjunction(c: Sequence[Atom], sep: str = ", ") -> str:
    return "[" + sep.join(str(a) for a in c) + "]"


def terms(c: Iterable[Atom]) -> List[str]:
    """Distinct terms of ``c`` in order of first occurrence."""
    seen: Dict[str, None] = {}
    for a in c:
        for t in a.args:
            seen.setdefault(t, None)
    return list(seen)


def variables(c: Iterable[Atom]) -> List[str]:
    return [t for t in terms(c) if is_var(t)]


def constants(c: Iterable[Atom]) -> List[str]:
    return [t for t in terms(c) if not is_var(t)]


def is_ground(c: Iterable[Atom]) -> bool:
    return not any(is_var(t) for a in c for t in a.args)


def signature_string(c: Sequence[Atom]) -> str:
    return "".join(a.rel for a in c)


# ---------------------------------------------------------------------------
# schema and sorts


@dataclass(frozen=True)
class RelationSchema:
    name: str
    sorts: Tuple[str, ...]
    kind: str = "state"  # "state" or "action"
    static: bool = False

    @property
    def arity(self) -> int:
        return len(self.sorts)


class Schema:
    """Relations plus typed constants.

    A constant may belong to several sorts; the domain of a variable inside a
    conjunction is the intersection of the sorts of all positions it fills.
    """

    def __init__(self, relations: Iterable[RelationSchema], constant_sorts: Mapping[str, Iterable[str]],
                 sorts: Optional[Iterable[str]] = None):
        self.relations: Dict[str, RelationSchema] = {r.name: r for r in relations}
        self.constant_sorts: Dict[str, Tuple[str, ...]] = {c: tuple(s) for c, s in constant_sorts.items()}
        declared = list(sorts) if sorts is not None else []
        for r in self.relations.values():
            declared.extend(r.sorts)
        for ss in self.constant_sorts.values():
            declared.extend(ss)
        self.sorts: Tuple[str, ...] = tuple(dict.fromkeys(declared))
        self.members: Dict[str, frozenset] = {
            s: frozenset(c for c, ss in self.constant_sorts.items() if s in ss) for s in self.sorts
        }
        self.all_constants = frozenset(self.constant_sorts)

    @property
    def constants(self) -> List[str]:
        return list(self.constant_sorts)

    def state_relations(self) -> List[RelationSchema]:
        return [r for r in self.relations.values() if r.kind == "state"]

    def action_relations(self) -> List[RelationSchema]:
        return [r for r in self.relations.values() if r.kind == "action"]

    def relation(self, name: str) -> RelationSchema:
        try:
            return self.relations[name]
        except KeyError:
            raise SortError(f"unknown relation {name!r}") from None

    def check_atom(self, a: Atom) -> None:
        r = self.relation(a.rel)
        if len(a.args) != r.arity:
            raise SortError(f"{a}: expected {r.arity} arguments")
        for t, s in zip(a.args, r.sorts):
            if not is_var(t) and t not in self.members[s]:
                raise SortError(f"{a}: constant {t!r} is not of sort {s!r}")

    def var_domains(self, c: Iterable[Atom]) -> Dict[str, frozenset]:
        doms: Dict[str, frozenset] = {}
        for a in c:
            r = self.relation(a.rel)
            for t, s in zip(a.args, r.sorts):
                if is_var(t):
                    doms[t] = doms[t] & self.members[s] if t in doms else self.members[s]
        return doms

    def term_domains(self, c: Sequence[Atom]) -> Dict[str, frozenset]:
        """Domain of every term of ``c``; a constant's domain is itself."""
        doms = self.var_domains(c)
        for t in constants(c):
            doms[t] = frozenset((t,))
        return doms

    def check(self, c: Sequence[Atom]) -> None:
        for a in c:
            self.check_atom(a)
        for v, d in self.var_domains(c).items():
            if not d:
                raise SortError(f"variable {v} occurs at positions of incompatible sorts")

    def is_sort_correct(self, c: Sequence[Atom]) -> bool:
        try:
            self.check(c)
        except SortError:
            return False
        return True


# ---------------------------------------------------------------------------
# substitutions and matching


def apply_substitution(c: Sequence[Atom], theta: Mapping[str, str], schema: Optional[Schema] = None) -> Conjunction:
    out = tuple(Atom(a.rel, tuple(theta.get(t, t) for t in a.args)) for a in c)
    if schema is not None:
        for a in out:
            schema.check_atom(a)
    return out


def iter_matchers(pattern: Sequence[Atom], target: Iterable[Atom],
                  allowed: Optional[Callable[[str, str], bool]] = None,
                  exclude: Iterable[str] = ()) -> Iterator[Substitution]:
    """Yield every OI-respecting substitution mapping ``pattern`` into ``target``.

    Variables must map to pairwise distinct terms, none of which is a constant
    of the pattern or listed in ``exclude``.  ``allowed(var, term)`` can veto
    individual bindings (used for sort restrictions).
    """
    by_rel: Dict[str, List[Atom]] = {}
    for a in target:
        by_rel.setdefault(a.rel, []).append(a)
    pat = list(dict.fromkeys(pattern))
    if any(a.rel not in by_rel for a in pat):
        return
    pat.sort(key=lambda a: len(by_rel[a.rel]))
    blocked = set(constants(pattern)) | set(exclude)
    binding: Dict[str, str] = {}
    used: set = set()

    def extend(i: int) -> Iterator[Substitution]:
        if i == len(pat):
            yield dict(binding)
            return
        p = pat[i]
        for cand in by_rel[p.rel]:
            if len(cand.args) != len(p.args):
                continue
            added: List[str] = []
            ok = True
            for pt, ct in zip(p.args, cand.args):
                if not is_var(pt):
                    if pt != ct:
                        ok = False
                        break
                elif pt in binding:
                    if binding[pt] != ct:
                        ok = False
                        break
                else:
                    if ct in used or ct in blocked or (allowed is not None and not allowed(pt, ct)):
                        ok = False
                        break
                    binding[pt] = ct
                    used.add(ct)
                    added.append(pt)
            if ok:
                yield from extend(i + 1)
            for v in added:
                used.discard(binding.pop(v))

    yield from extend(0)


def oi_matchers(pattern: Sequence[Atom], target: Iterable[Atom],
                allowed: Optional[Callable[[str, str], bool]] = None) -> List[Substitution]:
    return list(iter_matchers(pattern, target, allowed))


def oi_subsumes(target: Iterable[Atom], pattern: Sequence[Atom],
                allowed: Optional[Callable[[str, str], bool]] = None) -> bool:
    """True iff ``target`` is OI-subsumed by ``pattern`` (pattern maps into target)."""
    return next(iter_matchers(pattern, target, allowed), None) is not None


def iter_groundings(c: Sequence[Atom], schema: Schema, exclude: Iterable[str] = ()) -> Iterator[Substitution]:
    """Injective sort-respecting maps from vars(c) to constants absent from c."""
    vs = variables(c)
    doms = schema.var_domains(c)
    taken = set(constants(c)) | set(exclude)
    pools = [sorted(doms[v] - taken) for v in vs]
    for combo in itertools.product(*pools):
        if len(set(combo)) == len(combo):
            yield dict(zip(vs, combo))


def oi_groundings(c: Sequence[Atom], schema: Schema) -> List[Conjunction]:
    return [apply_substitution(c, th) for th in iter_groundings(c, schema)]


# ---------------------------------------------------------------------------
# canonical forms


def renumber(c: Sequence[Atom], prefix: str = "V", start: int = 1) -> Conjunction:
    names = {v: f"{prefix}{i}" for i, v in enumerate(variables(c), start)}
    return apply_substitution(c, names)


def _signature_permutations(c: Sequence[Atom]) -> Iterator[Conjunction]:
    groups: Dict[str, List[int]] = {}
    for i, a in enumerate(c):
        groups.setdefault(a.rel, []).append(i)
    slots = list(groups.values())
    for perms in itertools.product(*(itertools.permutations(g) for g in slots)):
        out = list(c)
        for positions, perm in zip(slots, perms):
            for dst, src in zip(positions, perm):
                out[dst] = c[src]
        yield tuple(out)


def _render(c: Sequence[Atom]) -> str:
    return ",".join(map(str, c))


def canonicalize(c: Sequence[Atom]) -> Conjunction:
    """Least rendering over signature-preserving permutations, variables renumbered V1, V2, ..."""
    best: Optional[Conjunction] = None
    best_text = ""
    for perm in _signature_permutations(c):
        r = renumber(perm)
        text = _render(r)
        if best is None or text < best_text:
            best, best_text = r, text
    return best if best is not None else ()


def canonical_key(c: Sequence[Atom]) -> str:
    return _render(canonicalize(c))


def set_key(c: Iterable[Atom]) -> str:
    """Key identifying a conjunction as a set of atoms, modulo variable renaming."""
    return canonical_key(tuple(sorted(set(c))))


def is_canonical(c: Sequence[Atom]) -> bool:
    return renumber(c) == canonicalize(c)


# ---------------------------------------------------------------------------
# sensibility


@dataclass(frozen=True)
class IntegrityConstraint:
    """A forbidden pattern.  ``var_sorts`` optionally narrows pattern variables to a sort."""

    pattern: Conjunction
    var_sorts: Tuple[Tuple[str, str], ...] = ()

    def __str__(self) -> str:
        text = ", ".join(map(str, self.pattern))
        if self.var_sorts:
            text += " where " + " ".join(f"{v}:{s}" for v, s in self.var_sorts)
        return text

    def violated_by(self, c: Sequence[Atom], schema: Optional[Schema] = None) -> bool:
        if schema is None:
            return oi_subsumes(c, self.pattern)
        pdoms = schema.var_domains(self.pattern)
        for v, s in self.var_sorts:
            pdoms[v] = pdoms.get(v, schema.all_constants) & schema.members[s]
        cdoms = schema.term_domains(c)

        def allowed(var: str, term: str) -> bool:
            return cdoms[term] <= pdoms[var]

        return oi_subsumes(c, self.pattern, allowed)


def is_sensible(c: Sequence[Atom], constraints: Iterable[IntegrityConstraint], schema: Optional[Schema] = None) -> bool:
    """False when ``c`` is ill-sorted or some forbidden pattern maps into it.

    Variables of ``c`` behave as fresh distinct constants; a pattern variable
    may only match a term whose possible values all lie inside its own domain.
    """
    if schema is not None and not schema.is_sort_correct(c):
        return False
    return not any(k.violated_by(c, schema) for k in constraints)

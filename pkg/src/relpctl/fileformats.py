"""Plain-text domain, policy, example and state files.

Domain file (one directive per line, ``#`` starts a comment)::

    sorts: block, place
    constants: a:block+place b:block+place fl:place
    state_relations: cl(block) on(block,place)
    action_relations: move(block,place,place)
    static: wat rub sep
    order: cl on
    constraint forbidden: on(X,Y), on(Z,Y) where Y:block
    init: cl(a), on(a,fl), cl(b), on(b,fl)
    rule move(A,B,C): 0.9 : body cl(A), cl(B), on(A,C) => head cl(A), on(A,B), cl(C)

Rules with the same action atom and body form one probabilistic group.
"""

from __future__ import annotations

import re
from typing import Dict, List, Tuple

from .learner import ExampleSet
from .logic import Atom, Conjunction, IntegrityConstraint, RelationSchema, Schema, is_ground, render_conjunction
from .rmdp import NOOP, Policy, PolicyError, RMDPModel, RuleGroup
from .syntax import Cursor, ParseError, parse_atoms, read_atom, read_atoms

_REL_DECL = re.compile(r"([a-z][A-Za-z0-9_]*)\(([^)]*)\)")
_STOCHASTIC = re.compile(r"\s*[0-9.]+\s*:")
_PROB = re.compile(r"\s*([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*")


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def _relations(text: str, kind: str, static: set) -> List[RelationSchema]:
    out = []
    for name, args in _REL_DECL.findall(text):
        sorts = tuple(a.strip() for a in args.split(",") if a.strip())
        out.append(RelationSchema(name, sorts, kind, name in static))
    return out


def parse_domain(text: str, name: str = "") -> RMDPModel:
    sorts: List[str] = []
    consts: Dict[str, Tuple[str, ...]] = {}
    state_text, action_text = "", ""
    static: set = set()
    order: List[str] = []
    constraint_lines: List[Tuple[int, str]] = []
    init_lines: List[Tuple[int, str]] = []
    rule_lines: List[Tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip(raw)
        if not line:
            continue
        key, sep, rest = line.partition(":")
        key = key.strip()
        if not sep:
            raise ParseError(f"line {lineno}: expected 'directive: ...'", raw)
        if key == "sorts":
            sorts += [s.strip() for s in rest.split(",") if s.strip()]
        elif key == "constants":
            for item in rest.split():
                cname, _, csorts = item.partition(":")
                if not csorts:
                    raise ParseError(f"line {lineno}: constant {cname!r} lacks a sort", raw)
                consts[cname] = tuple(csorts.split("+"))
        elif key == "state_relations":
            state_text += " " + rest
        elif key == "action_relations":
            action_text += " " + rest
        elif key == "static":
            static |= set(rest.split())
        elif key == "order":
            order = rest.split()
        elif key == "name":
            name = rest.strip()
        elif key == "constraint forbidden":
            constraint_lines.append((lineno, rest))
        elif key == "init":
            init_lines.append((lineno, rest))
        elif key.startswith("rule"):
            rule_lines.append((lineno, line[len("rule"):]))
        else:
            raise ParseError(f"line {lineno}: unknown directive {key!r}", raw)
    relations = _relations(state_text, "state", static) + _relations(action_text, "action", static)
    schema = Schema(relations, consts, sorts)
    constraints = []
    for lineno, body in constraint_lines:
        pattern_text, _, where = body.partition(" where ")
        var_sorts = tuple(tuple(item.split(":", 1)) for item in where.split())
        constraints.append(IntegrityConstraint(parse_atoms(pattern_text), var_sorts))
    init = [frozenset(parse_atoms(body)) for _, body in init_lines]
    groups: Dict[Tuple[Atom, Conjunction], List[Tuple[float, Conjunction]]] = {}
    for lineno, body in rule_lines:
        cur = Cursor(body)
        act = read_atom(cur)
        cur.expect(":")
        m = _PROB.match(body, cur.pos)
        if not m:
            cur.fail(f"line {lineno}: expected probability")
        cur.pos = m.end()
        cur.expect(":")
        cur.expect("body")
        rule_body = read_atoms(cur, stop=("=>",))
        cur.expect("=>")
        cur.expect("head")
        head = read_atoms(cur)
        if not cur.at_end():
            cur.fail(f"line {lineno}: trailing input")
        groups.setdefault((act, rule_body), []).append((float(m.group(1)), head))
    rule_groups = [RuleGroup(a, b, tuple(outs)) for (a, b), outs in groups.items()]
    return RMDPModel(schema, rule_groups, constraints, init, order or None, name=name)


def render_domain(model: RMDPModel) -> str:
    schema = model.schema
    lines = []
    if model.name:
        lines.append(f"name: {model.name}")
    lines.append("sorts: " + ", ".join(schema.sorts))
    lines.append("constants: " + " ".join(f"{c}:{'+'.join(s)}" for c, s in schema.constant_sorts.items()))
    rel = lambda r: f"{r.name}({','.join(r.sorts)})"
    lines.append("state_relations: " + " ".join(rel(r) for r in schema.state_relations()))
    lines.append("action_relations: " + " ".join(rel(r) for r in schema.action_relations()))
    if model.static_relations:
        lines.append("static: " + " ".join(model.static_relations))
    lines.append("order: " + " ".join(model.relation_order))
    for k in model.constraints:
        lines.append(f"constraint forbidden: {k}")
    for s in model.init:
        lines.append("init: " + ", ".join(sorted(map(str, s))))
    for g in model.groups:
        for p, head in g.outcomes:
            lines.append(f"rule {g.action}: {p!r} : body {', '.join(map(str, g.body))} => head {', '.join(map(str, head))}")
    return "\n".join(lines) + "\n"


def parse_policy(text: str) -> Policy:
    rules = []
    closed = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip(raw)
        if not line:
            continue
        if closed:
            raise PolicyError(f"line {lineno}: nothing may follow 'otherwise noop'")
        if line == "otherwise noop":
            closed = True
            continue
        if _STOCHASTIC.match(line):
            raise PolicyError(f"line {lineno}: stochastic policy entries are not supported")
        if not line.startswith("when"):
            raise PolicyError(f"line {lineno}: expected 'when <atoms> do <action>'")
        guard_text, sep, act_text = line[len("when"):].partition(" do ")
        if not sep:
            if line[len("when"):].strip().startswith("do "):
                guard_text, act_text = "", line[len("when"):].strip()[3:]
            else:
                raise PolicyError(f"line {lineno}: missing 'do'")
        act = parse_atoms(act_text)
        if len(act) != 1:
            raise PolicyError(f"line {lineno}: exactly one action expected")
        if act[0] == NOOP:
            raise PolicyError(f"line {lineno}: use 'otherwise noop' for the default")
        rules.append((parse_atoms(guard_text), act[0]))
    return Policy(tuple(rules))


def render_policy(policy: Policy) -> str:
    lines = [f"when {', '.join(map(str, g))} do {a}" for g, a in policy.rules]
    lines.append("otherwise noop")
    return "\n".join(lines) + "\n"


def parse_examples(text: str) -> ExampleSet:
    pos, neg = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip(raw)
        if not line:
            continue
        sign, body = line[0], line[1:]
        if sign not in "+-" or not body.startswith(" "):
            raise ParseError(f"line {lineno}: examples start with '+ ' or '- '", raw)
        (pos if sign == "+" else neg).append(parse_atoms(body))
    return ExampleSet(tuple(pos), tuple(neg))


def render_examples(examples: ExampleSet) -> str:
    lines = [f"+ {render_conjunction(e)}" for e in examples.positives]
    lines += [f"- {render_conjunction(e)}" for e in examples.negatives]
    return "\n".join(lines) + "\n"


def parse_state(text: str, model: RMDPModel):
    """Parse a ground state; missing static atoms of the model are added."""
    atoms = parse_atoms(" ".join(_strip(l) for l in text.splitlines()))
    if not is_ground(atoms):
        raise ParseError("a state must be ground", text)
    model.schema.check(atoms)
    return frozenset(atoms) | model.static_atoms

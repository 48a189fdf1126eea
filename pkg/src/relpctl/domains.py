"""Built-in Blocks World and Chemical Warehouse models and the example generator."""

from __future__ import annotations

import random
import string
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .formula import Formula, PathOp
from .learner import ExampleSet
from .logic import Atom, Conjunction, IntegrityConstraint, RelationSchema, Schema, atom, is_sensible, set_key
from .modelcheck import SatEngine, TOLERANCE, bits_to_mask, mask_to_bits
from .rmdp import Policy, ResourceError, RMDPModel, RuleGroup, enumerate_states, validate_policy
from .syntax import parse_atoms

FLOOR = "fl"
SUCCESS = 0.9
WORLD_TYPES = ("wat", "rub", "sep")
DEFAULT_CW_OBJECTS: Tuple[Tuple[str, str], ...] = (
    ("a", "wat"), ("b", "wat"), ("c", "rub"), ("d", "rub"), ("e", "sep"), ("f", "sep"),
)

_BW_CONSTRAINTS = [
    ("on(X,X)", ()),
    ("cl(X), on(Y,X)", ()),
    ("on(X,Y), on(X,Z)", ()),
    ("on(X,Y), on(Z,Y)", (("Y", "block"),)),
    ("on(X,Y), on(Y,X)", ()),
    ("on(X,Y), on(Y,Z), on(Z,X)", ()),
]


def _constraints(extra: Sequence[str] = ()) -> List[IntegrityConstraint]:
    out = [IntegrityConstraint(parse_atoms(p), s) for p, s in _BW_CONSTRAINTS]
    out += [IntegrityConstraint(parse_atoms(p)) for p in extra]
    return out


def _move_groups(guard: Conjunction = (), success: float = SUCCESS) -> List[RuleGroup]:
    """Block-to-block, from-floor and to-floor moves, each guarded by extra body atoms."""
    shapes = [
        ("move(A,B,C)", "cl(A), cl(B), on(A,C)", "cl(A), on(A,B), cl(C)"),
        ("move(A,B,fl)", "cl(A), cl(B), on(A,fl)", "cl(A), on(A,B)"),
        ("move(A,fl,C)", "cl(A), on(A,C)", "cl(A), on(A,fl), cl(C)"),
    ]
    groups = []
    for act, body, head in shapes:
        b = parse_atoms(body) + tuple(guard)
        h = parse_atoms(head) + tuple(guard)
        groups.append(RuleGroup(parse_atoms(act)[0], b, ((success, h), (round(1 - success, 12), b))))
    return groups


def _block_names(n: int) -> List[str]:
    letters = [c for c in string.ascii_lowercase]
    if n <= len(letters):
        return letters[:n]
    return [f"b{i}" for i in range(1, n + 1)]


def _base_schema(blocks: Sequence[str], typed: bool) -> Schema:
    rels = [RelationSchema("cl", ("block",)), RelationSchema("on", ("block", "place"))]
    if typed:
        rels += [RelationSchema(t, ("block",), static=True) for t in sorted(WORLD_TYPES)]
    rels.append(RelationSchema("move", ("block", "place", "place"), kind="action"))
    consts = {b: ("block", "place") for b in blocks}
    consts[FLOOR] = ("place",)
    return Schema(rels, consts, ["block", "place"])


def _all_on_floor(blocks: Sequence[str]) -> List[Atom]:
    return [atom("cl", b) for b in blocks] + [atom("on", b, FLOOR) for b in blocks]


def builtin_blocks_world(n: int, success: float = SUCCESS) -> RMDPModel:
    blocks = _block_names(n)
    return RMDPModel(_base_schema(blocks, typed=False), _move_groups(success=success), _constraints(),
                     [frozenset(_all_on_floor(blocks))], name=f"blocks{n}")


def builtin_chemical_warehouse(objects: Sequence[Tuple[str, str]] = DEFAULT_CW_OBJECTS,
                               success: float = SUCCESS) -> RMDPModel:
    """Blocks World whose objects carry a static type; separators only move off the floor."""
    for name, kind in objects:
        if kind not in WORLD_TYPES:
            raise ValueError(f"object {name}: type must be one of {WORLD_TYPES}")
    blocks = [o for o, _ in objects]
    groups = []
    for kind in ("wat", "rub"):
        groups += _move_groups((atom(kind, "A"),), success)
    groups += [g for g in _move_groups((atom("sep", "A"),), success) if g.action.args[2] == FLOOR]
    exclusive = ["wat(X), rub(X)", "wat(X), sep(X)", "rub(X), sep(X)"]
    init = frozenset(_all_on_floor(blocks) + [atom(kind, o) for o, kind in objects])
    return RMDPModel(_base_schema(blocks, typed=True), groups, _constraints(exclusive), [init],
                     name="chemical_warehouse")


BUILTINS: Dict[str, Callable[..., RMDPModel]] = {
    "blocks": builtin_blocks_world,
    "cw": builtin_chemical_warehouse,
}


def builtin(name: str) -> RMDPModel:
    """``blocks:3``, ``cw`` or ``cw:a=wat,b=rub,...``."""
    kind, _, arg = name.partition(":")
    if kind == "blocks":
        return builtin_blocks_world(int(arg or 3))
    if kind == "cw":
        if not arg:
            return builtin_chemical_warehouse()
        objs = [tuple(item.split("=", 1)) for item in arg.split(",")]
        return builtin_chemical_warehouse(objs)
    raise ValueError(f"unknown built-in domain {name!r}")


# ---------------------------------------------------------------------------
# example generation


def disjunctive_sat_mask(engine: SatEngine, alpha: float, k: int, op: PathOp,
                         disjuncts: Sequence[Conjunction]) -> np.ndarray:
    """Satisfaction of ``P>=alpha op<=k (phi_1 or phi_2 ...)`` with one shared OI grounding.

    Disjuncts must use disjoint variables.  A grounding combines one witness per
    disjunct (or none, when that disjunct is never true); goal sets are unions.
    """
    options: List[List[Tuple[Dict[str, str], int]]] = []
    for phi in disjuncts:
        options.append([({}, 0)] + engine.groundings(phi))
    goals = set()

    def combine(i: int, theta: Dict[str, str], bits: int) -> None:
        if i == len(options):
            if bits:
                goals.add(bits)
            return
        for th, b in options[i]:
            images = set(theta.values())
            if images.isdisjoint(th.values()):
                combine(i + 1, {**theta, **th}, bits | b)

    combine(0, {}, 0)
    sat = np.zeros(engine.n, dtype=bool)
    goal_list = sorted(goals)
    for start in range(0, len(goal_list), engine.CHUNK):
        chunk = goal_list[start:start + engine.CHUNK]
        goal = np.stack([bits_to_mask(b, engine.n) for b in chunk], axis=1)
        v = engine.values(goal, op, k)
        relevant = v > 0 if PathOp(op) == PathOp.F else goal
        sat |= ((v >= alpha - TOLERANCE) & relevant).any(axis=1)
    return sat


def generate_examples(model: RMDPModel, target: Optional[Formula], n_pos: int, n_neg: int, length: int,
                      seed: int, var_pool: int = 8, constants: Optional[Sequence[str]] = None,
                      budget: int = 200_000, labels: Optional[np.ndarray] = None) -> ExampleSet:
    """Sample sensible abstract states and label them all-or-none against ``target``.

    ``labels`` may replace ``target`` with a precomputed satisfaction vector
    over the model's enumerated states.
    """
    engine = SatEngine.for_model(model)
    sat = labels if labels is not None else engine.sat_mask(target)
    sat_bits = mask_to_bits(np.flatnonzero(sat))
    schema = model.schema
    rels = [r for r in schema.state_relations()]
    allowed_consts = list(constants) if constants is not None else schema.constants
    variables = [f"X{i}" for i in range(var_pool)]
    pools = {s: variables + [c for c in allowed_consts if c in schema.members[s]] for s in schema.sorts}
    rng = random.Random(seed)
    positives: List[Conjunction] = []
    negatives: List[Conjunction] = []
    seen = set()
    for _ in range(budget):
        if len(positives) >= n_pos and len(negatives) >= n_neg:
            break
        atoms: List[Atom] = []
        while len(atoms) < length:
            r = rng.choice(rels)
            a = Atom(r.name, tuple(rng.choice(pools[s]) for s in r.sorts))
            if a not in atoms:
                atoms.append(a)
        example = tuple(atoms)
        if not is_sensible(example, model.constraints, schema):
            continue
        covered = engine.covered(example)
        if not covered:
            continue
        key = set_key(example)
        if key in seen:
            continue
        seen.add(key)
        if covered & ~sat_bits == 0:
            if len(positives) < n_pos:
                positives.append(example)
        elif covered & sat_bits == 0:
            if len(negatives) < n_neg:
                negatives.append(example)
    if len(positives) < n_pos or len(negatives) < n_neg:
        raise ResourceError(f"sample budget {budget} exhausted with {len(positives)} positives "
                            f"and {len(negatives)} negatives")
    return ExampleSet(tuple(positives), tuple(negatives))


def random_decision_list(model: RMDPModel, rng: random.Random, max_rules: int = 3,
                         lift: float = 0.5) -> Policy:
    """A random deterministic decision list.

    Each rule takes an enabled action of a random state and guards it with up
    to three atoms of that state sharing an object with the action.  With
    probability ``lift`` the rule's constants (other than the floor) become
    variables, provided the guard binds every action argument.
    """
    states = enumerate_states(model)
    rules: List[Tuple[Conjunction, Atom]] = []
    guards = set()
    for _ in range(rng.randint(0, max_rules)):
        s = rng.choice(states)
        acts = model.enabled(s)
        if not acts:
            continue
        act = rng.choice(acts)
        related = sorted((a for a in s if set(a.args) & set(act.args)), key=str)
        guard = tuple(rng.sample(related, min(len(related), rng.randint(1, 3))))
        named = {t for a in guard for t in a.args}
        if rng.random() < lift and set(act.args) - {FLOOR} <= named:
            names = {c: f"V{i}" for i, c in enumerate(sorted(named | set(act.args))) if c != FLOOR}
            guard = tuple(Atom(a.rel, tuple(names.get(t, t) for t in a.args)) for a in guard)
            act = Atom(act.rel, tuple(names.get(t, t) for t in act.args))
        key = set_key(guard)
        if key in guards:
            continue
        candidate = Policy(tuple(rules) + ((guard, act),))
        if validate_policy(model, candidate):
            continue
        guards.add(key)
        rules.append((guard, act))
    return Policy(tuple(rules))

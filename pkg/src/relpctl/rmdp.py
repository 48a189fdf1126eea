"""Relational MDPs grounded over a finite set of typed constants."""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from .logic import (Atom, Conjunction, IntegrityConstraint, Schema, SortError, apply_substitution, is_sensible,
                    is_var, iter_matchers, set_key, variables)

State = FrozenSet[Atom]
NOOP = Atom("noop", ())
DEFAULT_STATE_CAP = 10 ** 6


class DomainError(RuntimeError):
    """Inconsistent model or a query outside the model's contract."""


class ResourceError(RuntimeError):
    """A configured size guard was exceeded."""


@dataclass(frozen=True)
class RuleGroup:
    """Transition rules sharing an action atom and a body, one entry per outcome."""

    action: Atom
    body: Conjunction
    outcomes: Tuple[Tuple[float, Conjunction], ...]

    def atoms(self) -> Conjunction:
        out = (self.action,) + tuple(self.body)
        for _, head in self.outcomes:
            out += tuple(head)
        return out


@dataclass
class GroundMDP:
    """Explicit state space with per-state (action, [(successor index, prob)]) lists.

    An empty action list means the state only self-loops.
    """

    states: List[State]
    index: Dict[State, int]
    actions: List[List[Tuple[Atom, List[Tuple[int, float]]]]]

    def __len__(self) -> int:
        return len(self.states)


def state_key(s: Iterable[Atom]) -> Tuple[str, ...]:
    return tuple(sorted(map(str, s)))


class RMDPModel:
    def __init__(self, schema: Schema, groups: Sequence[RuleGroup],
                 constraints: Sequence[IntegrityConstraint] = (),
                 init: Sequence[Iterable[Atom]] = (), order: Optional[Sequence[str]] = None,
                 state_cap: int = DEFAULT_STATE_CAP, name: str = ""):
        self.schema = schema
        self.groups = list(groups)
        self.constraints = list(constraints)
        self.init = [frozenset(s) for s in init]
        self.relation_order = list(order) if order else [r.name for r in schema.state_relations()]
        self.state_cap = state_cap
        self.name = name
        self._domains = [schema.var_domains(g.atoms()) for g in self.groups]
        self._rule_consts = [frozenset(t for a in g.atoms() for t in a.args if not is_var(t)) for g in self.groups]
        self._action_vars = [variables((g.action,)) for g in self.groups]
        self._enabled_cache: Dict[State, Dict[Atom, Tuple[int, Dict[str, str]]]] = {}
        self._successor_cache: Dict[Tuple[State, Atom], List[Tuple[State, float]]] = {}
        self._interned: Dict[State, State] = {}
        self._lock = threading.Lock()
        self._ground: Optional[GroundMDP] = None

    # -- basic queries -----------------------------------------------------
    @property
    def static_relations(self) -> List[str]:
        return [r.name for r in self.schema.state_relations() if r.static]

    @property
    def static_atoms(self) -> FrozenSet[Atom]:
        statics = set(self.static_relations)
        return frozenset(a for s in self.init for a in s if a.rel in statics)

    def is_legal(self, s: Iterable[Atom]) -> bool:
        return is_sensible(tuple(s), self.constraints, self.schema)

    def _groundings(self, s: State) -> Dict[Atom, Tuple[int, Dict[str, str]]]:
        cached = self._enabled_cache.get(s)
        if cached is not None:
            return cached
        found: Dict[Atom, Tuple[int, Dict[str, str]]] = {}
        for gi, g in enumerate(self.groups):
            dom = self._domains[gi]
            allowed = lambda v, t, dom=dom: t in dom[v]
            for theta in iter_matchers(g.body, s, allowed, exclude=self._rule_consts[gi]):
                free = [v for v in self._action_vars[gi] if v not in theta]
                for th in _extend_injective(theta, free, dom, self._rule_consts[gi]):
                    a = apply_substitution((g.action,), th)[0]
                    found.setdefault(a, (gi, th))
        found = dict(sorted(found.items()))
        self._enabled_cache[s] = found
        return found

    def enabled(self, s: State) -> List[Atom]:
        return list(self._groundings(frozenset(s)))

    def successors(self, s: State, a: Atom) -> List[Tuple[State, float]]:
        s = frozenset(s)
        cached = self._successor_cache.get((s, a))
        if cached is not None:
            return list(cached)
        match = self._groundings(s).get(a)
        if match is None:
            raise DomainError(f"action {a} is not enabled")
        gi, theta = match
        g = self.groups[gi]
        body = set(apply_substitution(g.body, theta))
        rest = s - body
        out = []
        for p, head in g.outcomes:
            u = frozenset(rest | set(apply_substitution(head, theta)))
            out.append((self._interned.setdefault(u, u), p))
        self._successor_cache[(s, a)] = out
        return list(out)

    # -- ground compilation ------------------------------------------------
    @property
    def ground(self) -> GroundMDP:
        if self._ground is None:
            with self._lock:
                if self._ground is None:
                    self._ground = self._compile()
        return self._ground

    def _compile(self) -> GroundMDP:
        seen: Set[State] = set()
        queue = deque()
        for s in self.init:
            if s not in seen:
                if not self.is_legal(s):
                    raise DomainError(f"initial state violates a constraint: {state_key(s)}")
                seen.add(s)
                queue.append(s)
        edges: Dict[State, List[Tuple[Atom, List[Tuple[State, float]]]]] = {}
        while queue:
            s = queue.popleft()
            out = []
            for a in self.enabled(s):
                succ = self.successors(s, a)
                for t, _ in succ:
                    if t not in seen:
                        if not self.is_legal(t):
                            raise DomainError(f"action {a} produces an illegal state {state_key(t)}")
                        seen.add(t)
                        if len(seen) > self.state_cap:
                            raise ResourceError(f"state space exceeds cap of {self.state_cap}")
                        queue.append(t)
                out.append((a, succ))
            edges[s] = out
        states = sorted(seen, key=state_key)
        index = {s: i for i, s in enumerate(states)}
        actions = []
        for s in states:
            row = []
            for a, succ in edges[s]:
                merged: Dict[int, float] = {}
                for t, p in succ:
                    merged[index[t]] = merged.get(index[t], 0.0) + p
                row.append((a, sorted(merged.items())))
            actions.append(row)
        return GroundMDP(states, index, actions)


def _extend_injective(theta: Dict[str, str], free: List[str], dom: Dict[str, frozenset], blocked: FrozenSet[str]):
    if not free:
        yield theta
        return
    v, rest = free[0], free[1:]
    for c in sorted(dom[v] - blocked - set(theta.values())):
        yield from _extend_injective({**theta, v: c}, rest, dom, blocked)


# ---------------------------------------------------------------------------
# module-level operations


def validate_model(model: RMDPModel) -> List[str]:
    schema = model.schema
    problems: List[str] = []
    for g in model.groups:
        label = f"rule group {g.action} / {', '.join(map(str, g.body))}"
        total = sum(p for p, _ in g.outcomes)
        if abs(total - 1.0) > 1e-9:
            problems.append(f"{label}: probabilities sum to {round(total, 9):g}")
        for p, _ in g.outcomes:
            if not 0.0 < p <= 1.0:
                problems.append(f"{label}: probability {p} outside (0, 1]")
        try:
            if schema.relation(g.action.rel).kind != "action":
                problems.append(f"{label}: {g.action.rel} is not an action relation")
            for a in g.body + tuple(x for _, h in g.outcomes for x in h):
                if schema.relation(a.rel).kind != "state":
                    problems.append(f"{label}: {a.rel} is not a state relation")
            schema.check(g.atoms())
        except SortError as exc:
            problems.append(f"{label}: {exc}")
        action_vars = set(variables((g.action,)))
        for v in variables(g.body):
            if v not in action_vars:
                problems.append(f"{label}: body variable {v} does not occur in the action")
        for _, head in g.outcomes:
            for v in variables(head):
                if v not in action_vars:
                    problems.append(f"{label}: head variable {v} does not occur in the action")
            statics = set(model.static_relations)
            for a in head:
                if a.rel in statics and a not in g.body:
                    problems.append(f"{label}: static atom {a} in a head without a body copy")
    for k in model.constraints:
        try:
            schema.check(k.pattern)
        except SortError as exc:
            problems.append(f"constraint {k}: {exc}")
    for s in model.init:
        if not model.is_legal(s):
            problems.append(f"initial state {state_key(s)} is illegal")
    return problems


def enabled_ground_actions(model, s: State) -> List[Atom]:
    return model.enabled(frozenset(s))


def successors(model, s: State, a: Atom) -> List[Tuple[State, float]]:
    return model.successors(frozenset(s), a)


def enumerate_states(model) -> List[State]:
    return model.ground.states


def reachable_states(model, s: State, k: int) -> Set[State]:
    frontier = {frozenset(s)}
    seen = set(frontier)
    for _ in range(k):
        nxt = set()
        for t in frontier:
            acts = model.enabled(t)
            for a in acts:
                for u, _ in model.successors(t, a):
                    if u not in seen:
                        seen.add(u)
                        nxt.add(u)
        frontier = nxt
        if not frontier:
            break
    return seen


# ---------------------------------------------------------------------------
# policies


@dataclass(frozen=True)
class Policy:
    """Ordered decision list of (guard, action) pairs; unmatched states take the no-op."""

    rules: Tuple[Tuple[Conjunction, Atom], ...] = ()


class PolicyError(ValueError):
    pass


def validate_policy(model: RMDPModel, policy: Policy) -> List[str]:
    problems: List[str] = []
    seen: Dict[str, str] = {}
    for guard, act in policy.rules:
        try:
            if model.schema.relation(act.rel).kind != "action":
                problems.append(f"{act.rel} is not an action relation")
            model.schema.check(tuple(guard) + (act,))
        except SortError as exc:
            problems.append(str(exc))
            continue
        unbound = [v for v in variables((act,)) if v not in set(variables(guard))]
        if unbound:
            problems.append(f"non-deterministic rule: action {act} has variables {unbound} not bound by its guard")
        joint = set_key(tuple(guard) + (Atom("do_" + act.rel, act.args),))
        gkey = set_key(guard)
        if seen.setdefault(gkey, joint) != joint:
            problems.append(f"non-deterministic rule: guard {list(map(str, guard))} maps to several actions")
    return problems


def policy_action(model: RMDPModel, policy: Policy, s: State) -> Atom:
    s = frozenset(s)
    enabled = set(model.enabled(s))
    for guard, act in policy.rules:
        options = sorted({apply_substitution((act,), th)[0] for th in iter_matchers(guard, s)} & enabled)
        if options:
            return options[0]
    return NOOP


class ConstrainedModel:
    """View of a model restricted to the single action chosen by a policy."""

    def __init__(self, base: RMDPModel, policy: Policy):
        problems = validate_policy(base, policy)
        if problems:
            raise PolicyError("; ".join(problems))
        self.base = base
        self.policy = policy
        self.schema = base.schema
        self.constraints = base.constraints
        self.relation_order = base.relation_order
        self.static_relations = base.static_relations
        self.static_atoms = base.static_atoms
        self._ground: Optional[GroundMDP] = None
        self._lock = threading.Lock()
        self._chosen: Dict[State, Atom] = {}

    def is_legal(self, s) -> bool:
        return self.base.is_legal(s)

    def enabled(self, s: State) -> List[Atom]:
        s = frozenset(s)
        if s not in self._chosen:
            self._chosen[s] = policy_action(self.base, self.policy, s)
        return [self._chosen[s]]

    def successors(self, s: State, a: Atom) -> List[Tuple[State, float]]:
        if a == NOOP:
            return [(frozenset(s), 1.0)]
        return self.base.successors(s, a)

    @property
    def ground(self) -> GroundMDP:
        if self._ground is None:
            with self._lock:
                if self._ground is None:
                    g = self.base.ground
                    actions = []
                    for i, s in enumerate(g.states):
                        chosen = policy_action(self.base, self.policy, s)
                        row = dict(g.actions[i])
                        actions.append([(chosen, row[chosen] if chosen != NOOP else [(i, 1.0)])])
                    self._ground = GroundMDP(g.states, g.index, actions)
        return self._ground


def constrain_to_policy(model: RMDPModel, policy: Policy) -> ConstrainedModel:
    """Policy-restricted view; memoized per (model, policy) so ground data is shared."""
    cache = model.__dict__.setdefault("_constrained", {})
    view = cache.get(policy)
    if view is None:
        view = cache.setdefault(policy, ConstrainedModel(model, policy))
    return view

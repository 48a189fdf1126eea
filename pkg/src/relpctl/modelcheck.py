"""Bounded model checking of ``P>=alpha F<=k phi`` / ``P>=alpha G<=k phi``.

Three routes compute the same numbers:

* ``path_prob`` and friends: memoized recursion from a single state,
* ``brute_force_path_prob``: naive expectimax without memoization (test oracle),
* :class:`SatEngine`: value iteration over the whole ground state space,
  vectorized over all groundings of a formula at once.

Step 0 is the current state.  States without an enabled action self-loop.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

import numpy as np
from scipy import sparse

from .formula import Formula, PathOp
from .logic import Atom, Conjunction, apply_substitution, constants, is_var, iter_matchers
from .rmdp import Policy, ResourceError, State, constrain_to_policy, reachable_states

TOLERANCE = 1e-12
ORACLE_NODE_LIMIT = 10 ** 7

Predicate = Union[Callable[[State], bool], Iterable[State]]


@dataclass(frozen=True)
class PathQuery:
    op: PathOp
    goal: Callable[[State], bool]
    k: int


def as_predicate(goal: Predicate) -> Callable[[State], bool]:
    if callable(goal):
        return goal
    members = frozenset(frozenset(s) for s in goal)
    return members.__contains__


def contains(phi: Iterable[Atom]) -> Callable[[State], bool]:
    """Predicate: the state contains every atom of the ground conjunction ``phi``."""
    need = frozenset(phi)
    return lambda s: need <= s


def _model_for(model, policy: Optional[Policy]):
    return constrain_to_policy(model, policy) if policy is not None else model


def path_prob(model, s: State, query: PathQuery) -> float:
    """Memoized finite-horizon expectimax (max over enabled actions)."""
    memo: Dict[Tuple[State, int], float] = {}
    pred = query.goal
    finally_ = PathOp(query.op) == PathOp.F

    def value(state: State, t: int) -> float:
        key = (state, t)
        if key in memo:
            return memo[key]
        inside = pred(state)
        if finally_ and inside:
            result = 1.0
        elif not finally_ and not inside:
            result = 0.0
        elif t == 0:
            result = 0.0 if finally_ else 1.0
        else:
            acts = model.enabled(state)
            if not acts:
                result = value(state, t - 1)
            else:
                result = max(sum(p * value(u, t - 1) for u, p in model.successors(state, a)) for a in acts)
        memo[key] = result
        return result

    return value(frozenset(s), query.k)


def max_prob_eventually(model, s: State, goal: Predicate, k: int) -> float:
    return path_prob(model, s, PathQuery(PathOp.F, as_predicate(goal), k))


def max_prob_globally(model, s: State, safe: Predicate, k: int) -> float:
    return path_prob(model, s, PathQuery(PathOp.G, as_predicate(safe), k))


def policy_prob(model, policy: Policy, s: State, query: PathQuery) -> float:
    return path_prob(constrain_to_policy(model, policy), s, query)


def brute_force_path_prob(model, s: State, query: PathQuery, policy: Optional[Policy] = None,
                          node_limit: int = ORACLE_NODE_LIMIT) -> float:
    """Naive expectimax over every action/outcome sequence; no value caching, no shortcuts."""
    m = _model_for(model, policy)
    pred = query.goal
    finally_ = PathOp(query.op) == PathOp.F
    visited = [0]
    transitions: Dict[State, List[List[Tuple[State, float]]]] = {}

    def outcomes(state: State) -> List[List[Tuple[State, float]]]:
        # Transition structure only; probabilities of paths are never reused.
        if state not in transitions:
            transitions[state] = [list(m.successors(state, a)) for a in m.enabled(state)]
        return transitions[state]

    def value(state: State, t: int) -> float:
        visited[0] += 1
        if visited[0] > node_limit:
            raise ResourceError(f"oracle explored more than {node_limit} nodes")
        inside = pred(state)
        if t == 0:
            return 1.0 if inside else 0.0
        if finally_ and inside:
            return 1.0
        if not finally_ and not inside:
            return 0.0
        choices = outcomes(state)
        if not choices:
            return value(state, t - 1)
        best = 0.0
        for succ in choices:
            total = 0.0
            for u, p in succ:
                total += p * value(u, t - 1)
            best = max(best, total)
        return best

    return value(frozenset(s), query.k)


# ---------------------------------------------------------------------------
# satisfaction with existential grounding


def _theta_key(theta: Dict[str, str]) -> Tuple[Tuple[str, str], ...]:
    return tuple(sorted(theta.items()))


def relevant_groundings(model, s: State, phi: Conjunction, k: int, op: PathOp = PathOp.F) -> List[Dict[str, str]]:
    s = frozenset(s)
    pool = reachable_states(model, s, k) if PathOp(op) == PathOp.F else {s}
    found = {}
    for t in pool:
        for th in iter_matchers(phi, t):
            found.setdefault(_theta_key(th), th)
    return [found[key] for key in sorted(found)]


def _groundings_by_distance(model, s: State, phi: Conjunction, k: int, op: PathOp):
    """Relevant groundings, those matching closer to ``s`` first, produced lazily."""
    s = frozenset(s)
    seen_theta = set()
    frontier, seen = [s], {s}
    for depth in range(k + 1):
        for t in sorted(frontier, key=sorted):
            for th in iter_matchers(phi, t):
                key = _theta_key(th)
                if key not in seen_theta:
                    seen_theta.add(key)
                    yield th
        if PathOp(op) == PathOp.G or depth == k:
            return
        nxt = []
        for t in frontier:
            for a in model.enabled(t):
                for u, _ in model.successors(t, a):
                    if u not in seen:
                        seen.add(u)
                        nxt.append(u)
        frontier = nxt


def grounding_probabilities(model, s: State, psi: Formula, policy: Optional[Policy] = None,
                            oracle: bool = False) -> List[Tuple[Dict[str, str], float]]:
    m = _model_for(model, policy)
    out = []
    for th in relevant_groundings(m, s, psi.phi, psi.k, psi.op):
        query = PathQuery(psi.op, contains(apply_substitution(psi.phi, th)), psi.k)
        p = brute_force_path_prob(m, s, query) if oracle else path_prob(m, s, query)
        out.append((th, p))
    return out


def satisfies(model, s: State, psi: Formula, policy: Optional[Policy] = None, oracle: bool = False) -> bool:
    """Exists a grounding, fixed along every path, reaching the threshold."""
    m = _model_for(model, policy)
    for th in _groundings_by_distance(m, s, psi.phi, psi.k, psi.op):
        query = PathQuery(psi.op, contains(apply_substitution(psi.phi, th)), psi.k)
        p = brute_force_path_prob(m, s, query) if oracle else path_prob(m, s, query)
        if p >= psi.alpha - TOLERANCE:
            return True
    return False


def sat_state_set(model, psi: Formula, states: Optional[Sequence[State]] = None,
                  policy: Optional[Policy] = None) -> Set[State]:
    engine = SatEngine.for_model(_model_for(model, policy))
    if states is None:
        mask = engine.sat_mask(psi)
        return {engine.states[i] for i in np.flatnonzero(mask)}
    idx = [engine.index[frozenset(s)] for s in states]
    mask = engine.sat_mask(psi, focus=idx)
    return {engine.states[i] for i in idx if mask[i]}


# ---------------------------------------------------------------------------
# vectorized engine


def bits_to_mask(bits: int, n: int) -> np.ndarray:
    raw = np.frombuffer(bits.to_bytes((n + 7) // 8 or 1, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:n].astype(bool)


def mask_to_bits(indices: Iterable[int]) -> int:
    bits = 0
    for i in indices:
        bits |= 1 << int(i)
    return bits


class SatEngine:
    """Whole-state-space value iteration for one (possibly policy-constrained) model.

    Ground atoms are indexed by the bitset of states containing them, so the
    groundings of a formula and their goal sets are found by intersecting
    Python integers.
    """

    CHUNK = 256
    GOAL_CACHE_LIMIT = 400_000

    def __init__(self, model):
        self.model = model
        g = model.ground
        self.states: List[State] = g.states
        self.index = g.index
        n = self.n = len(g.states)
        # rows are (state, action) pairs; states with equally many actions get
        # consecutive row blocks so the max over actions is a reshape
        per_state = [acts or [(None, [(i, 1.0)])] for i, acts in enumerate(g.actions)]
        by_count: Dict[int, List[int]] = {}
        for i, acts in enumerate(per_state):
            by_count.setdefault(len(acts), []).append(i)
        rows, cols, vals = [], [], []
        self._blocks: List[Tuple[int, int, int, np.ndarray]] = []
        r = 0
        for count in sorted(by_count):
            members = by_count[count]
            self._blocks.append((r, len(members), count, np.asarray(members, dtype=np.int64)))
            for i in members:
                for _, succ in per_state[i]:
                    for j, p in succ:
                        rows.append(r)
                        cols.append(j)
                        vals.append(p)
                    r += 1
        self.successor_bits = [mask_to_bits(j for _, succ in acts for j, _ in succ) for acts in per_state]
        self.transitions = sparse.csr_matrix((vals, (rows, cols)), shape=(r, n))
        bits: Dict[Atom, int] = {}
        for i, s in enumerate(g.states):
            for a in s:
                bits[a] = bits.get(a, 0) | (1 << i)
        self.atom_bits = bits
        self.by_rel: Dict[str, List[Atom]] = {}
        for a in sorted(bits):
            self.by_rel.setdefault(a.rel, []).append(a)
        self.all_bits = (1 << n) - 1
        self._reach_cache: Dict[Tuple[int, int], int] = {}
        self._layer_cache: Dict[Tuple[int, int], list] = {}
        self._goal_cache: Dict[tuple, Dict[int, int]] = {}

    @classmethod
    def for_model(cls, model) -> "SatEngine":
        eng = getattr(model, "_sat_engine", None)
        if eng is None:
            eng = cls(model)
            model._sat_engine = eng
        return eng

    # -- reachability ------------------------------------------------------
    def reach_bits(self, start: int, k: int) -> int:
        key = (start, k)
        if key in self._reach_cache:
            return self._reach_cache[key]
        seen = frontier = start
        for _ in range(k):
            nxt = 0
            f = frontier
            while f:
                low = f & -f
                nxt |= self.successor_bits[low.bit_length() - 1]
                f ^= low
            frontier = nxt & ~seen
            if not frontier:
                break
            seen |= frontier
        self._reach_cache[key] = seen
        return seen

    # -- groundings --------------------------------------------------------
    def conj_bits(self, ground: Iterable[Atom]) -> int:
        bits = self.all_bits
        for a in ground:
            bits &= self.atom_bits.get(a, 0)
            if not bits:
                break
        return bits

    def groundings(self, phi: Sequence[Atom], within: Optional[int] = None) -> List[Tuple[Dict[str, str], int]]:
        """All OI groundings of ``phi`` holding in some state of ``within``, with their state bitsets."""
        region = self.all_bits if within is None else within
        atoms = list(dict.fromkeys(phi))
        atoms.sort(key=lambda a: len(self.by_rel.get(a.rel, ())))
        blocked = set(constants(phi))
        out: List[Tuple[Dict[str, str], int]] = []
        binding: Dict[str, str] = {}
        used: Set[str] = set()

        def extend(i: int, bits: int) -> None:
            if i == len(atoms):
                out.append((dict(binding), bits))
                return
            p = atoms[i]
            if all(not is_var(t) or t in binding for t in p.args):
                g = Atom(p.rel, tuple(binding.get(t, t) for t in p.args))
                nb = bits & self.atom_bits.get(g, 0)
                if nb:
                    extend(i + 1, nb)
                return
            for cand in self.by_rel.get(p.rel, ()):
                added = []
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
                    elif ct in used or ct in blocked:
                        ok = False
                        break
                    else:
                        binding[pt] = ct
                        used.add(ct)
                        added.append(pt)
                if ok:
                    nb = bits & self.atom_bits[cand]
                    if nb:
                        extend(i + 1, nb)
                for v in added:
                    used.discard(binding.pop(v))

        extend(0, region)
        return out

    def covered(self, example: Sequence[Atom]) -> int:
        """Bitset of the states OI-subsumed by an abstract state."""
        bits = 0
        for _, b in self.groundings(example):
            bits |= b
        return bits

    # -- value iteration ---------------------------------------------------
    def _restrict(self, bits: int):
        """Transition rows and max-blocks of the states in ``bits`` only."""
        if bits == self.all_bits:
            return self.transitions, self._blocks
        mask = bits_to_mask(bits, self.n)
        row_idx, blocks, r = [], [], 0
        for start, m, count, members in self._blocks:
            sel = np.flatnonzero(mask[members])
            if not len(sel):
                continue
            rows = (start + sel[:, None] * count + np.arange(count)).ravel()
            row_idx.append(rows)
            blocks.append((r, len(sel), count, members[sel]))
            r += len(rows)
        if not row_idx:
            return self.transitions[:0], []
        return self.transitions[np.concatenate(row_idx)], blocks

    def _layers(self, focus_bits: Optional[int], k: int):
        if focus_bits is None:
            return [(self.transitions, self._blocks)] * k
        key = (focus_bits, k)
        plan = self._layer_cache.get(key)
        if plan is None:
            # step t only needs states from which the focus is reachable in k - t steps
            plan = [self._restrict(self.reach_bits(focus_bits, k - t)) for t in range(1, k + 1)]
            if len(self._layer_cache) > 64:
                self._layer_cache.clear()
            self._layer_cache[key] = plan
        return plan

    def values(self, goal: np.ndarray, op: PathOp, k: int, focus_bits: Optional[int] = None) -> np.ndarray:
        """Finite-horizon values for a (states x groundings) goal/safe indicator matrix.

        With ``focus_bits`` only the focus rows of the result are meaningful.
        """
        g = goal.astype(np.float64)
        v = g.copy()
        finally_ = PathOp(op) == PathOp.F
        for transitions, blocks in self._layers(focus_bits, k):
            q = transitions @ v
            best = np.zeros_like(v)
            for start, m, count, members in blocks:
                block = q[start:start + m * count]
                best[members] = block if count == 1 else block.reshape(m, count, -1).max(axis=1)
            v = np.maximum(g, best) if finally_ else g * best
        return v

    def sat_mask(self, psi: Formula, focus: Optional[Sequence[int]] = None) -> np.ndarray:
        """Boolean vector over states; only entries in ``focus`` are guaranteed when given."""
        return self.sat_mask_bits(psi, None if focus is None else mask_to_bits(focus))

    def sat_mask_bits(self, psi: Formula, focus_bits: Optional[int] = None) -> np.ndarray:
        return bits_to_mask(self.sat_bits(psi, focus_bits), self.n)

    def sat_bits(self, psi: Formula, focus_bits: Optional[int] = None) -> int:
        """Bitset of satisfying states (exact on ``focus_bits`` when given, else everywhere).

        Results per ground goal set are cached, so formulae sharing groundings
        (an instantiated formula and its parent, say) reuse earlier work.
        """
        focus = self.all_bits if focus_bits is None else focus_bits
        horizon = self.reach_bits(focus, psi.k) if focus_bits is not None else self.all_bits
        finally_ = psi.op == PathOp.F
        thetas = self.groundings(psi.phi, horizon if finally_ else focus)
        cache = self._goal_cache.setdefault((focus_bits, psi.op, psi.k, psi.alpha), {})
        if len(cache) > self.GOAL_CACHE_LIMIT:
            cache.clear()
        sat = 0
        pending: Dict[int, None] = {}
        for theta, bits in thetas:
            goal = bits if finally_ else self.conj_bits(apply_substitution(psi.phi, theta)) & horizon
            hit = cache.get(goal)
            if hit is None:
                pending[goal] = None
            else:
                sat |= hit
        goals = list(pending)
        threshold = psi.alpha - TOLERANCE
        for start in range(0, len(goals), self.CHUNK):
            chunk = goals[start:start + self.CHUNK]
            goal = np.stack([bits_to_mask(b, self.n) for b in chunk], axis=1)
            v = self.values(goal, psi.op, psi.k, focus_bits)
            # every outcome has positive probability, so a positive value means
            # the goal is reachable, i.e. the grounding is relevant
            relevant = v > 0 if finally_ else goal
            ok = (v >= threshold) & relevant
            packed = np.packbits(ok, axis=0, bitorder="little")
            for j, b in enumerate(chunk):
                col = int.from_bytes(packed[:, j].tobytes(), "little") & focus
                cache[b] = col
                sat |= col
        return sat

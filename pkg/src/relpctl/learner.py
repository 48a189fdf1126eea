"""Search for step-bounded probabilistic formulae consistent with labeled abstract states."""

from __future__ import annotations

from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .formula import Formula, render_formula, syntactic_refines
from .logic import Conjunction, canonicalize, oi_subsumes, renumber, set_key
from .modelcheck import SatEngine, satisfies
from .refine import CandidateNode, Phase, Refiner, SearchStats
from .rmdp import Policy, ResourceError, State, constrain_to_policy, enumerate_states


@dataclass(frozen=True)
class ExampleSet:
    positives: Tuple[Conjunction, ...] = ()
    negatives: Tuple[Conjunction, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "positives", tuple(tuple(e) for e in self.positives))
        object.__setattr__(self, "negatives", tuple(tuple(e) for e in self.negatives))

    def __len__(self) -> int:
        return len(self.positives) + len(self.negatives)


@dataclass(frozen=True)
class LearnConfig:
    alpha: float
    k: int
    max_len: int
    instantiation: bool = True
    seed: int = 0
    subsumption_pruning: bool = True
    jobs: int = 1
    example_cap: Optional[int] = None

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"threshold {self.alpha} outside [0, 1]")
        if self.k < 0 or self.max_len < 0:
            raise ValueError("step bound and maximum length must be non-negative")


@dataclass(frozen=True)
class Verdict:
    pos_ok: bool
    neg_ok: bool

    @property
    def consistent(self) -> bool:
        return self.pos_ok and self.neg_ok


@dataclass(frozen=True)
class Solution:
    formula: Formula
    depth: int

    def __str__(self) -> str:
        return render_formula(self.formula)

    def as_dict(self) -> Dict[str, object]:
        return {"formula": str(self), "depth": self.depth}


def solution_key(psi: Formula) -> Tuple[str, str]:
    return set_key(psi.phi), psi.op.value


def display_form(psi: Formula) -> Formula:
    """Canonical atom order with variables renamed X0, X1, ..."""
    return psi.with_phi(renumber(canonicalize(psi.phi), "X", 0))


# ---------------------------------------------------------------------------
# consistency


class ConsistencyChecker:
    """Verdicts for candidate formulae against one example set, cached modulo renaming.

    Each example is reduced once to the bitset of ground states it subsumes;
    a verdict then needs satisfaction only on the union of those states.
    """

    def __init__(self, model, examples: ExampleSet, example_cap: Optional[int] = None):
        self.engine = SatEngine.for_model(model)
        self.pos_bits = [self._cover(e, example_cap) for e in examples.positives]
        self.neg_bits = [self._cover(e, example_cap) for e in examples.negatives]
        self.pos_union = 0
        for b in self.pos_bits:
            self.pos_union |= b
        self.neg_union = 0
        for b in self.neg_bits:
            self.neg_union |= b
        self.cache: Dict[Tuple[str, str], Verdict] = {}

    def _cover(self, example: Conjunction, cap: Optional[int]) -> int:
        bits = self.engine.covered(example)
        if cap is not None and bin(bits).count("1") > cap:
            raise ResourceError(f"example {list(map(str, example))} subsumes more than {cap} states")
        return bits

    def compute(self, psi: Formula) -> Verdict:
        focus = self.pos_union | self.neg_union
        if not focus:
            return Verdict(True, True)
        sat_bits = self.engine.sat_bits(psi, focus)
        return Verdict(self.pos_union & ~sat_bits == 0, self.neg_union & sat_bits == 0)

    def lookup(self, psi: Formula) -> Optional[Verdict]:
        return self.cache.get(solution_key(psi))


@lru_cache(maxsize=16)
def _covered_states(model, examples: ExampleSet) -> Tuple[Tuple[State, ...], Tuple[State, ...]]:
    """Distinct states covered by the positives and by the negatives, found by OI-subsumption."""
    states = enumerate_states(model)

    def covered(group: Sequence[Conjunction]) -> Tuple[State, ...]:
        return tuple(dict.fromkeys(s for e in group for s in states if oi_subsumes(s, e)))

    return covered(examples.positives), covered(examples.negatives)


def check_consistency(model, psi: Formula, examples: ExampleSet, policy: Optional[Policy] = None,
                      oracle: bool = False) -> Verdict:
    """State-by-state consistency check through :func:`satisfies`.

    Covered states are found by filtering the enumerated state space with
    OI-subsumption.  With ``oracle`` set, probabilities come from the
    unmemoized brute-force recursion.
    """
    positive_states, negative_states = _covered_states(model, examples)

    def sat(s) -> bool:
        return satisfies(model, s, psi, policy=policy, oracle=oracle)

    pos_ok = all(sat(s) for s in positive_states)
    neg_ok = not any(sat(s) for s in negative_states)
    return Verdict(pos_ok, neg_ok)


def recheck_solution(model, solution: Solution, examples: ExampleSet, policy: Optional[Policy] = None) -> bool:
    """Independent re-check of a reported solution with the brute-force probabilities."""
    return check_consistency(model, solution.formula, examples, policy, oracle=True).consistent


# ---------------------------------------------------------------------------
# search


Trace = Callable[[CandidateNode, Verdict], None]


def _subsumed_by_failure(psi: Formula, failed: Sequence[Formula]) -> bool:
    return any(syntactic_refines(psi, f) for f in failed)


def learn(model, examples: ExampleSet, config: LearnConfig, policy: Optional[Policy] = None,
          trace: Optional[Trace] = None) -> Tuple[List[Solution], SearchStats]:
    """Depth-first general-to-specific search; returns solutions in canonical order and stats.

    Subsumption pruning: a candidate that is an OI-specialization of a formula
    already failing a positive example fails too, so it is not model-checked.
    Below a failing candidate, instantiation and globalization children are
    never generated.  Lengthening and unification subtrees are still walked,
    because under object identity merging two variables does not specialize.
    Non-canonical candidates are expanded but never reported; their verdict is
    shared with their canonical form.
    """
    stats = SearchStats()
    if config.max_len < 1:
        return [], stats
    view = constrain_to_policy(model, policy) if policy is not None else model
    checker = ConsistencyChecker(view, examples, config.example_cap)
    refiner = Refiner(model.schema, model.constraints, model.relation_order, config.max_len,
                      config.instantiation)
    pruning = config.subsumption_pruning
    pool = ThreadPoolExecutor(config.jobs) if config.jobs > 1 else None
    pending: Dict[Tuple[str, str], Future] = {}
    inferred_failure = Verdict(False, True)

    def prefetch(nodes: Sequence[CandidateNode], failed: Tuple[Formula, ...]) -> None:
        for n in nodes:
            key = solution_key(n.formula)
            if key in checker.cache or key in pending:
                continue
            if pruning and _subsumed_by_failure(n.formula, failed):
                continue
            pending[key] = pool.submit(checker.compute, n.formula)

    def verdict(n: CandidateNode, failed: Tuple[Formula, ...]) -> Verdict:
        key = solution_key(n.formula)
        found = checker.cache.get(key)
        if found is not None:
            return found
        if pruning and _subsumed_by_failure(n.formula, failed):
            stats.pruned_subsumption += 1
            return inferred_failure
        fut = pending.pop(key, None)
        v = fut.result() if fut is not None else checker.compute(n.formula)
        checker.cache[key] = v
        stats.candidates += 1
        if not v.pos_ok and pruning:
            stats.pruned_subsumption += 1
        return v

    solutions: Dict[Tuple[str, str], Solution] = {}
    try:
        roots = refiner.roots(config.alpha, config.k, stats)
        stack: List[Tuple[CandidateNode, Tuple[Formula, ...]]] = [(r, ()) for r in reversed(roots)]
        if pool is not None:
            prefetch(roots, ())
        while stack:
            node, failed = stack.pop()
            v = verdict(node, failed)
            if trace is not None:
                trace(node, v)
            cut = not v.pos_ok and pruning
            if cut:
                if node.phase >= Phase.INS:
                    continue
                if not _subsumed_by_failure(node.formula, failed):
                    failed = failed + (node.formula,)
            if node.canonical and v.consistent:
                key = solution_key(node.formula)
                if key not in solutions:
                    solutions[key] = Solution(display_form(node.formula), node.depth)
            children = refiner.refine(node, stats, structural_only=cut)
            if pool is not None:
                prefetch(children, failed)
            stack.extend((c, failed) for c in reversed(children))
    finally:
        if pool is not None:
            pool.shutdown(wait=True, cancel_futures=True)
    return sort_solutions(solutions.values()), stats


def learn_with_policy(model, examples: ExampleSet, config: LearnConfig, policy: Policy,
                      trace: Optional[Trace] = None) -> Tuple[List[Solution], SearchStats]:
    return learn(model, examples, config, policy, trace)


def sort_solutions(solutions) -> List[Solution]:
    return sorted(solutions, key=lambda s: (s.depth, len(s.formula.phi), s.formula.op.value, str(s)))


def most_specific(solutions: Sequence[Solution]) -> List[Solution]:
    if not solutions:
        return []
    deepest = max(s.depth for s in solutions)
    return sort_solutions(s for s in solutions if s.depth == deepest)


def solution_keys(solutions: Sequence[Solution]) -> set:
    return {solution_key(s.formula) for s in solutions}


def contains_formula(solutions: Sequence[Solution], psi: Formula) -> bool:
    """Whether ``psi`` is among ``solutions`` modulo variable renaming and atom order."""
    return solution_key(psi) in solution_keys(solutions) and any(
        s.formula.alpha == psi.alpha and s.formula.k == psi.k for s in solutions)


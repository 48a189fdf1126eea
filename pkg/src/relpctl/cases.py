"""Chemical Warehouse learning tasks used by the experiment scripts and acceptance tests."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

from .domains import builtin_chemical_warehouse, disjunctive_sat_mask, generate_examples
from .formula import PathOp, parse_formula
from .learner import ExampleSet
from .logic import Conjunction, oi_groundings
from .modelcheck import SatEngine, bits_to_mask
from .rmdp import RMDPModel
from .syntax import parse_atoms

STACK_TARGET = parse_formula("P>=0.9 F<=3 [on(X0,X1), on(X1,X3), rub(X0), sep(X1), wat(X3)]")
RUB_PAIR = parse_atoms("on(X0,X1), rub(X0), rub(X1)")
WAT_PAIR = parse_atoms("on(X2,X3), wat(X2), wat(X3)")
SAFE_STACK = parse_formula("P>=0.9 G<=3 [on(W,X), on(X,R), wat(W), sep(X), rub(R)]")
# Abstract states in which SAFE_STACK holds.
SAFE_STACK_SAT_LIST: Tuple[str, ...] = (
    "cl(Y), on(Y,fl), on(X,R), on(W,X), rub(R), sep(Y), sep(X), wat(W)",
    "cl(W1), cl(Z), on(W1,Y), on(X,R), on(W2,X), rub(R), sep(X), wat(W1), wat(W2)",
    "cl(R1), cl(Z), on(R1,Y), on(X,R2), on(W,X), rub(R1), rub(R2), sep(X), wat(W)",
)


@dataclass(frozen=True)
class Task:
    model: RMDPModel
    examples: ExampleSet
    alpha: float = 0.9
    k: int = 3


def stack_task(n_pos: int = 8, n_neg: int = 8, length: int = 8, seed: int = 0) -> Task:
    """Generator-labeled examples for the rub-on-sep-on-wat reachability target."""
    cw = builtin_chemical_warehouse()
    return Task(cw, generate_examples(cw, STACK_TARGET, n_pos, n_neg, length, seed))


def touching_pairs_task() -> Task:
    """One positive per disjunct of "two rub or two wat containers touch"; no negatives.

    Both positives are checked against the disjunctive labeling before use.
    """
    cw = builtin_chemical_warehouse()
    engine = SatEngine.for_model(cw)
    labels = disjunctive_sat_mask(engine, 0.9, 3, PathOp.F, [RUB_PAIR, WAT_PAIR])
    positives = (parse_atoms("on(X0,X1), wat(X0), wat(X1)"), parse_atoms("on(X0,X1), rub(X0), rub(X1)"))
    for e in positives:
        covered = bits_to_mask(engine.covered(e), engine.n)
        if not covered.any() or not labels[covered].all():
            raise AssertionError(f"example {e} is not positive for the disjunctive target")
    return Task(cw, ExampleSet(positives, ()))


def safe_stack_positives(model: RMDPModel) -> Tuple[Conjunction, ...]:
    """Every ground instance of the listed satisfying abstract states that covers a legal state."""
    engine = SatEngine.for_model(model)
    out = []
    for text in SAFE_STACK_SAT_LIST:
        out += [g for g in oi_groundings(parse_atoms(text), model.schema) if engine.covered(g)]
    return tuple(out)


def safe_stack_task() -> Task:
    cw = builtin_chemical_warehouse()
    return Task(cw, ExampleSet(safe_stack_positives(cw), ()))


"""Randomized small learning tasks shared by the soundness and containment tests."""

import random

from relpctl.domains import generate_examples
from relpctl.formula import Formula, PathOp
from relpctl.rmdp import ResourceError
from relpctl.syntax import parse_atoms

TARGET_SHAPES = ["on(X,Y), cl(X)", "on(X,fl), cl(X)", "on(X,Y), on(Y,Z)", "cl(X), cl(Y)", "on(X,Y), on(Y,fl)",
                 "on(a,X)", "cl(b), on(b,fl)", "on(X,Y), on(Y,Z), on(Z,fl)"]


def random_task(model, seed: int, max_len: int = 2):
    """A target-labeled example set over ``model`` plus the (alpha, k, max_len) to learn with."""
    rng = random.Random(seed)
    while True:
        target = Formula(rng.choice([0.5, 0.9]), rng.randint(0, 2), rng.choice(list(PathOp)),
                         parse_atoms(rng.choice(TARGET_SHAPES)))
        try:
            examples = generate_examples(model, target, rng.randint(1, 2), rng.randint(1, 2), rng.randint(2, 3),
                                         rng.randrange(10 ** 6), var_pool=3, budget=5_000)
        except ResourceError:
            continue
        return target, examples, (target.alpha, target.k, max_len)

"""Recover a safety property from ground instances of the abstract states that satisfy it.

The default length of 5 finds the five-atom safety formula itself; pass --max-len 7 to
allow the longer variants that also mention the clear separator (more than 30 minutes on one core).
"""

import argparse
import time

from relpctl.cases import SAFE_STACK, safe_stack_task
from relpctl.formula import PathOp, refines_phi
from relpctl.learner import LearnConfig, learn, most_specific


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-len", type=int, default=5)
    ap.add_argument("--instantiation", action="store_true")
    args = ap.parse_args()

    task = safe_stack_task()
    print(f"{len(task.examples.positives)} ground positives, no negatives")
    start = time.time()
    sols, stats = learn(task.model, task.examples,
                        LearnConfig(task.alpha, task.k, args.max_len, instantiation=args.instantiation))
    best = most_specific(sols)
    print(f"{len(sols)} solutions in {time.time() - start:.1f}s, {stats.as_dict()}")
    for s in best:
        mark = "*" if s.formula.op == PathOp.G and refines_phi(s.formula.phi, SAFE_STACK.phi) else " "
        print(f" {mark} depth {s.depth}: {s}")
    print("* = safety formula or a specialization of it")


if __name__ == "__main__":
    main()

"""Learn the rub-on-sep-on-wat reachability property from generator-labeled Chemical Warehouse examples."""

import argparse
import time

from relpctl.cases import STACK_TARGET, stack_task
from relpctl.learner import LearnConfig, contains_formula, learn, most_specific


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-len", type=int, default=5)
    ap.add_argument("--instantiation", action="store_true", help="also refine variables into constants")
    ap.add_argument("--pos", type=int, default=8)
    ap.add_argument("--neg", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    task = stack_task(args.pos, args.neg, seed=args.seed)
    print("examples:")
    for e in task.examples.positives:
        print("  +", ", ".join(map(str, e)))
    for e in task.examples.negatives:
        print("  -", ", ".join(map(str, e)))
    start = time.time()
    sols, stats = learn(task.model, task.examples,
                        LearnConfig(task.alpha, task.k, args.max_len, instantiation=args.instantiation))
    best = most_specific(sols)
    print(f"{len(sols)} solutions in {time.time() - start:.1f}s, {stats.as_dict()}")
    for s in best:
        print(f"  depth {s.depth}: {s}")
    print("target recovered:", contains_formula(best, STACK_TARGET))


if __name__ == "__main__":
    main()

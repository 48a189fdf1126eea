"""Learn from one positive per disjunct of "two rub or two wat containers touch" and show that no
learned formula commits to either disjunct."""

import argparse
import time

from relpctl.cases import RUB_PAIR, WAT_PAIR, touching_pairs_task
from relpctl.formula import refines_phi
from relpctl.learner import LearnConfig, learn, most_specific


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-len", type=int, default=3)
    ap.add_argument("--instantiation", action="store_true")
    args = ap.parse_args()

    task = touching_pairs_task()
    start = time.time()
    sols, stats = learn(task.model, task.examples,
                        LearnConfig(task.alpha, task.k, args.max_len, instantiation=args.instantiation))
    print(f"{len(sols)} solutions in {time.time() - start:.1f}s, {stats.as_dict()}")
    for s in most_specific(sols):
        print(f"  depth {s.depth}: {s}")
    committed = [s for s in sols if refines_phi(s.formula.phi, RUB_PAIR) or refines_phi(s.formula.phi, WAT_PAIR)]
    print("solutions refining a disjunct:", len(committed))


if __name__ == "__main__":
    main()

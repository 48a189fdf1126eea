"""Command-line front end: ``relpctl learn | check | gen | domain``.

Exit codes: 0 when something was found (solutions, satisfied verdict, file
written), 2 when the run completed without a result, 1 on any error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Dict, List, Optional

from .domains import builtin, generate_examples
from .fileformats import parse_domain, parse_examples, parse_policy, parse_state, render_domain, render_examples
from .formula import check_formula, parse_formula, render_formula
from .learner import LearnConfig, learn, most_specific
from .logic import SortError
from .modelcheck import grounding_probabilities
from .refine import CandidateNode
from .rmdp import DomainError, PolicyError, ResourceError, RMDPModel, constrain_to_policy, validate_model
from .syntax import ParseError

EXIT_FOUND, EXIT_ERROR, EXIT_NONE = 0, 1, 2


class CliError(Exception):
    pass


def load_domain(source: str) -> RMDPModel:
    if source.startswith("builtin:"):
        model = builtin(source[len("builtin:"):])
    else:
        model = parse_domain(Path(source).read_text(), name=Path(source).stem)
    problems = validate_model(model)
    if problems:
        raise CliError("invalid domain: " + "; ".join(problems))
    return model


def load_policy(path: Optional[str], model: RMDPModel):
    if not path:
        return None
    policy = parse_policy(Path(path).read_text())
    constrain_to_policy(model, policy)  # validates
    return policy


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_learn(args) -> int:
    model = load_domain(args.domain)
    examples = parse_examples(Path(args.examples).read_text())
    for e in examples.positives + examples.negatives:
        model.schema.check(e)
    policy = load_policy(args.policy, model)
    config = LearnConfig(alpha=args.alpha, k=args.k, max_len=args.max_len, instantiation=not args.no_instantiation,
                         seed=args.seed, subsumption_pruning=not args.no_pruning, jobs=args.jobs)
    trace = None
    if args.debug_tree:
        def trace(node: CandidateNode, verdict) -> None:
            flags = ("+" if verdict.pos_ok else "-") + ("+" if verdict.neg_ok else "-")
            mark = "" if node.canonical else " (variant)"
            print(f"{'  ' * node.depth}{node.formula} [{flags}]{mark}", file=sys.stderr)
    start = time.perf_counter()
    solutions, stats = learn(model, examples, config, policy, trace)
    elapsed = int(round((time.perf_counter() - start) * 1000))
    report: Dict[str, object] = {
        "config": {"domain": args.domain, "examples": args.examples, "alpha": config.alpha, "k": config.k,
                   "max_len": config.max_len, "instantiation": config.instantiation,
                   "mode": "policy" if policy is not None else "agnostic", "policy": args.policy,
                   "seed": config.seed, "subsumption_pruning": config.subsumption_pruning, "jobs": config.jobs},
        "solutions": [s.as_dict() for s in solutions],
        "most_specific": [s.as_dict() for s in most_specific(solutions)],
        "stats": stats.as_dict(),
        "elapsed_ms": elapsed,
    }
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    return EXIT_FOUND if solutions else EXIT_NONE


def cmd_check(args) -> int:
    model = load_domain(args.domain)
    psi = parse_formula(args.formula, model.schema)
    check_formula(psi, model.schema)
    if args.k_override is not None:
        psi = type(psi)(psi.alpha, args.k_override, psi.op, psi.phi)
    state = parse_state(Path(args.state).read_text(), model)
    if not model.is_legal(state):
        raise CliError("the state violates a domain constraint")
    policy = load_policy(args.policy, model)
    lines: List[str] = [f"formula: {render_formula(psi)}"]
    verdict = False
    for theta, p in grounding_probabilities(model, state, psi, policy):
        binding = ", ".join(f"{v}={c}" for v, c in sorted(theta.items()))
        lines.append(f"{{{binding}}}\t{p:.12g}")
        verdict = verdict or p >= psi.alpha - 1e-12
    lines.append(f"satisfied: {'true' if verdict else 'false'}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_FOUND if verdict else EXIT_NONE


def cmd_gen(args) -> int:
    model = load_domain(args.domain)
    target = parse_formula(args.target, model.schema)
    check_formula(target, model.schema)
    examples = generate_examples(model, target, args.pos, args.neg, args.length, args.seed,
                                 var_pool=args.var_pool, budget=args.budget)
    _emit(render_examples(examples), args.out)
    return EXIT_FOUND


def cmd_domain(args) -> int:
    _emit(render_domain(builtin(args.name)), args.out)
    return EXIT_FOUND


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relpctl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    domain_help = "domain file, or builtin:blocks:N / builtin:cw[:a=wat,...]"

    p = sub.add_parser("learn", help="learn formulae consistent with labeled examples")
    p.add_argument("--domain", required=True, help=domain_help)
    p.add_argument("--examples", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--max-len", type=int, required=True)
    p.add_argument("--no-instantiation", action="store_true")
    p.add_argument("--no-pruning", action="store_true", help="disable subsumption pruning")
    p.add_argument("--policy")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--debug-tree", action="store_true", help="print the search tree to stderr")
    p.add_argument("--out")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("check", help="model-check one formula in one ground state")
    p.add_argument("--domain", required=True, help=domain_help)
    p.add_argument("--formula", required=True)
    p.add_argument("--state", required=True, help="file with a bracketed ground atom list")
    p.add_argument("--policy")
    p.add_argument("--k-override", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("gen", help="sample labeled abstract examples for a target formula")
    p.add_argument("--domain", required=True, help=domain_help)
    p.add_argument("--target", required=True)
    p.add_argument("--pos", type=int, required=True)
    p.add_argument("--neg", type=int, required=True)
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--var-pool", type=int, default=8)
    p.add_argument("--budget", type=int, default=200_000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("domain", help="write a built-in domain as a domain file")
    p.add_argument("name", help="blocks:N or cw[:a=wat,...]")
    p.add_argument("--out")
    p.set_defaults(func=cmd_domain)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ParseError, PolicyError, SortError, DomainError, ResourceError, ValueError, OSError) as exc:
        print(f"relpctl {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

import pytest

from relpctl.formula import Formula, PathOp, parse_formula
from relpctl.learner import (ExampleSet, LearnConfig, Solution, check_consistency, contains_formula, learn,
                             learn_with_policy, most_specific, recheck_solution, solution_keys)
from relpctl.logic import oi_subsumes
from relpctl.modelcheck import satisfies
from relpctl.rmdp import Policy, ResourceError, enumerate_states
from relpctl.syntax import parse_atoms as P

from tasks import random_task


def two_block_task():
    return ExampleSet((P("on(a,b)"),), (P("on(b,a)"),))


class TestConsistency:
    def test_verdict_matches_states(self, bw3):
        ex = ExampleSet((P("cl(a), on(a,b)"), P("cl(a), on(a,c)")), (P("on(b,a)"),))
        psi = parse_formula("P>=1 F<=0 [cl(a), on(a,Y)]")
        v = check_consistency(bw3, psi, ex)
        assert v.pos_ok and v.neg_ok and v.consistent

    def test_negative_covered_state_satisfies(self, bw3):
        # Under ground semantics [on(X,b), on(b,c)] covers the tower a/b/c, where cl(a), on(a,b) holds.
        ex = ExampleSet((P("cl(a), on(a,b)"),), (P("on(X,b), on(b,c)"),))
        v = check_consistency(bw3, parse_formula("P>=1 F<=0 [cl(a), on(a,Y)]"), ex)
        assert v.pos_ok and not v.neg_ok

    def test_no_examples_is_vacuous(self, bw2):
        assert check_consistency(bw2, parse_formula("P>=1 G<=5 [on(a,b)]"), ExampleSet()).consistent


class TestLearn:
    def test_two_block_world(self, bw2):
        sols, stats = learn(bw2, two_block_task(), LearnConfig(0.9, 1, 1))
        assert contains_formula(sols, parse_formula("P>=0.9 F<=1 [on(a,b)]"))
        assert not contains_formula(sols, parse_formula("P>=0.9 F<=1 [on(X,Y)]"))
        assert stats.candidates > 0

    def test_zero_length(self, bw2):
        sols, stats = learn(bw2, two_block_task(), LearnConfig(0.9, 1, 0))
        assert sols == [] and stats.as_dict() == {"candidates": 0, "pruned_subsumption": 0,
                                                  "pruned_irrelevant": 0, "pruned_semantic": 0}

    def test_no_examples_accepts_every_candidate(self, bw2):
        sols, stats = learn(bw2, ExampleSet(), LearnConfig(0.9, 1, 1))
        assert len(sols) == stats.candidates > 0

    def test_solutions_are_consistent(self, bw3):
        ex = ExampleSet((P("cl(a), on(a,fl), on(b,fl)"),), (P("on(a,b), on(b,c)"),))
        sols, _ = learn(bw3, ex, LearnConfig(0.9, 2, 2))
        assert sols
        for s in sols:
            assert recheck_solution(bw3, s, ex)

    def test_parallel_checks_agree(self, bw3):
        ex = ExampleSet((P("cl(a), on(a,fl)"),), (P("on(a,b)"),))
        one, s1 = learn(bw3, ex, LearnConfig(0.9, 2, 2))
        two, s2 = learn(bw3, ex, LearnConfig(0.9, 2, 2, jobs=2))
        assert [str(s) for s in one] == [str(s) for s in two] and s1 == s2

    def test_deterministic(self, bw3):
        ex = ExampleSet((P("cl(a), on(a,fl)"),), (P("on(a,b)"),))
        assert learn(bw3, ex, LearnConfig(0.9, 2, 2)) == learn(bw3, ex, LearnConfig(0.9, 2, 2))

    def test_example_cap(self, bw3):
        with pytest.raises(ResourceError):
            learn(bw3, ExampleSet((P("cl(X)"),)), LearnConfig(0.9, 1, 1, example_cap=3))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            LearnConfig(1.5, 1, 1)
        with pytest.raises(ValueError):
            LearnConfig(0.5, -1, 1)


@pytest.mark.parametrize("seed", range(4))
def test_pruning_never_changes_solutions(bw3, seed):
    _, ex, (alpha, k, max_len) = random_task(bw3, seed)
    pruned, s1 = learn(bw3, ex, LearnConfig(alpha, k, max_len))
    full, s2 = learn(bw3, ex, LearnConfig(alpha, k, max_len, subsumption_pruning=False))
    assert solution_keys(pruned) == solution_keys(full)
    assert s2.candidates >= s1.candidates


class TestPolicyMode:
    def test_empty_policy_reduces_to_step_zero(self, bw3):
        ex = ExampleSet((P("cl(a), on(a,fl)"), P("cl(a), on(a,b)")), ())
        sols, _ = learn_with_policy(bw3, ex, LearnConfig(0.9, 3, 2, instantiation=False), Policy())
        assert sols
        covered = [s for e in ex.positives for s in enumerate_states(bw3) if oi_subsumes(s, e)]
        for sol in sols:
            now = Formula(1.0, 0, sol.formula.op, sol.formula.phi)
            assert all(satisfies(bw3, s, now) for s in covered)

    def test_policy_solutions_recheck(self, bw2):
        policy = Policy(((P("cl(a), cl(b)"), P("move(a,b,fl)")[0]),))
        sols, _ = learn_with_policy(bw2, two_block_task(), LearnConfig(0.9, 1, 1), policy)
        for s in sols:
            assert recheck_solution(bw2, s, two_block_task(), policy)


def test_most_specific():
    a = Solution(parse_formula("P>=0.9 F<=1 [cl(X0)]"), 1)
    b = Solution(parse_formula("P>=0.9 G<=1 [cl(X0)]"), 2)
    c = Solution(parse_formula("P>=0.9 F<=1 [cl(X0), on(X0,X1)]"), 2)
    assert most_specific([a, b, c]) == [b, c]
    assert most_specific([]) == []

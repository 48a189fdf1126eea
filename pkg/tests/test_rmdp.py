import itertools

import pytest

from relpctl.domains import builtin_blocks_world, builtin_chemical_warehouse
from relpctl.logic import Atom, RelationSchema, Schema, atom
from relpctl.rmdp import (NOOP, DomainError, Policy, PolicyError, RMDPModel, RuleGroup, constrain_to_policy,
                          enabled_ground_actions, enumerate_states, policy_action, reachable_states, successors,
                          validate_model)
from relpctl.syntax import parse_atoms as P


def S(text):
    return frozenset(P(text))


def towers_oracle(blocks):
    """All block configurations: each block sits on the floor or on a distinct block, no cycles."""
    out = set()
    places = list(blocks) + ["fl"]
    for support in itertools.product(places, repeat=len(blocks)):
        below = dict(zip(blocks, support))
        if any(b == s for b, s in below.items()):
            continue
        used = [s for s in support if s != "fl"]
        if len(used) != len(set(used)):
            continue
        ok = True
        for b in blocks:
            seen, cur = set(), b
            while cur != "fl":
                if cur in seen:
                    ok = False
                    break
                seen.add(cur)
                cur = below[cur]
            if not ok:
                break
        if not ok:
            continue
        atoms = {atom("on", b, s) for b, s in below.items()}
        atoms |= {atom("cl", b) for b in blocks if b not in used}
        out.add(frozenset(atoms))
    return out


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_state_space_matches_configuration_oracle(n):
    model = builtin_blocks_world(n)
    blocks = [chr(ord("a") + i) for i in range(n)]
    assert set(enumerate_states(model)) == towers_oracle(blocks)


def test_state_counts():
    assert [len(enumerate_states(builtin_blocks_world(n))) for n in (2, 3, 4)] == [3, 13, 73]


class TestTransitions:
    def test_enabled_two_blocks(self, bw2):
        s = S("cl(a), cl(b), on(a,fl), on(b,fl)")
        assert enabled_ground_actions(bw2, s) == [atom("move", "a", "b", "fl"), atom("move", "b", "a", "fl")]

    def test_success_and_failure(self, bw2):
        s = S("cl(a), cl(b), on(a,fl), on(b,fl)")
        out = dict(successors(bw2, s, atom("move", "a", "b", "fl")))
        assert out == {S("cl(a), on(a,b), on(b,fl)"): 0.9, s: pytest.approx(0.1)}

    def test_disabled_action(self, bw2):
        with pytest.raises(DomainError):
            successors(bw2, S("cl(a), on(a,b), on(b,fl)"), atom("move", "b", "a", "fl"))

    def test_unstack_to_floor(self, bw2):
        s = S("cl(a), on(a,b), on(b,fl)")
        assert enabled_ground_actions(bw2, s) == [atom("move", "a", "fl", "b")]

    def test_successors_are_legal_and_sum_to_one(self, bw3):
        for s in enumerate_states(bw3):
            for a in enabled_ground_actions(bw3, s):
                out = successors(bw3, s, a)
                assert sum(p for _, p in out) == pytest.approx(1.0)
                assert all(bw3.is_legal(u) for u, _ in out)

    def test_reachable(self, bw2):
        s = S("cl(a), cl(b), on(a,fl), on(b,fl)")
        assert reachable_states(bw2, s, 0) == {s}
        assert len(reachable_states(bw2, s, 1)) == 3


class TestChemicalWarehouse:
    def test_separators_only_leave_the_floor(self, cw):
        for s in enumerate_states(cw):
            for a in enabled_ground_actions(cw, s):
                if a.args[0] in ("e", "f"):
                    assert a.args[2] == "fl"

    def test_static_types_preserved(self, cw):
        types = cw.static_atoms
        assert len(types) == 6
        for s in enumerate_states(cw):
            assert types <= s

    def test_unknown_type_rejected(self):
        with pytest.raises(ValueError):
            builtin_chemical_warehouse([("a", "acid")])


def toy_schema():
    return Schema([RelationSchema("p", ("obj",)), RelationSchema("q", ("obj",)),
                   RelationSchema("go", ("obj",), kind="action")], {"a": ("obj",)})


class TestValidation:
    def test_builtins_valid(self, bw3, cw):
        assert validate_model(bw3) == [] and validate_model(cw) == []

    def test_probabilities_must_sum_to_one(self):
        g = RuleGroup(atom("go", "X"), P("p(X)"), ((0.9, P("q(X)")), (0.2, P("p(X)"))))
        problems = validate_model(RMDPModel(toy_schema(), [g]))
        assert any("probabilities sum to 1.1" in p for p in problems)

    def test_body_variable_outside_action(self):
        g = RuleGroup(atom("go", "X"), P("p(X), q(Y)"), ((1.0, P("q(X), q(Y)")),))
        problems = validate_model(RMDPModel(toy_schema(), [g]))
        assert any("body variable Y" in p for p in problems)


class TestPolicies:
    def test_first_matching_rule(self, bw2):
        policy = Policy(((P("cl(X), cl(Y)"), atom("move", "X", "Y", "fl")),))
        s = S("cl(a), cl(b), on(a,fl), on(b,fl)")
        assert policy_action(bw2, policy, s) == atom("move", "a", "b", "fl")
        assert policy_action(bw2, policy, S("cl(a), on(a,b), on(b,fl)")) == NOOP

    def test_constrained_view_has_one_action(self, bw3):
        view = constrain_to_policy(bw3, Policy(((P("on(X,Y), cl(X)"), atom("move", "X", "fl", "Y")),)))
        for i, _ in enumerate(view.ground.states):
            assert len(view.ground.actions[i]) == 1

    def test_empty_policy_self_loops(self, bw2):
        view = constrain_to_policy(bw2, Policy())
        for i, _ in enumerate(view.ground.states):
            assert view.ground.actions[i] == [(NOOP, [(i, 1.0)])]

    def test_unbound_action_variable_rejected(self, bw2):
        with pytest.raises(PolicyError):
            constrain_to_policy(bw2, Policy(((P("cl(X)"), atom("move", "X", "Y", "fl")),)))

    def test_memoized(self, bw2):
        p = Policy()
        assert constrain_to_policy(bw2, p) is constrain_to_policy(bw2, p)


def test_no_op_atom_is_distinct():
    assert NOOP == Atom("noop", ())

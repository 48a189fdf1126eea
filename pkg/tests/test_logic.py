import math

import pytest
from hypothesis import given, strategies as st

from relpctl.domains import builtin_blocks_world
from relpctl.logic import (Atom, IntegrityConstraint, RelationSchema, Schema, SortError, apply_substitution,
                           canonical_key, canonicalize, is_canonical, is_sensible, oi_groundings, oi_matchers,
                           oi_subsumes, renumber, set_key, signature_string)
from relpctl.syntax import parse_atoms as P


def flat_schema(consts, relations=(("cl", 1), ("on", 2))):
    rels = [RelationSchema(name, ("obj",) * n) for name, n in relations]
    return Schema(rels, {c: ("obj",) for c in consts})


class TestSubstitution:
    def test_binds_variable(self):
        assert apply_substitution(P("on(X,Y)"), {"X": "a"}) == P("on(a,Y)")

    def test_identity(self):
        assert apply_substitution(P("cl(b)"), {}) == P("cl(b)")

    def test_simultaneous_replacement(self):
        assert apply_substitution(P("on(Y,X)"), {"Y": "a", "X": "Z"}) == P("on(a,Z)")

    def test_sort_checked_when_schema_given(self):
        bw = builtin_blocks_world(2)
        with pytest.raises(SortError):
            apply_substitution(P("cl(X)"), {"X": "fl"}, bw.schema)


class TestMatching:
    def test_single_match(self):
        assert oi_matchers(P("on(Y,X)"), P("on(a,c), cl(b)")) == [{"Y": "a", "X": "c"}]

    def test_repeated_variable_never_matches_legal_state(self, bw3):
        for s in bw3.ground.states:
            assert oi_matchers(P("on(X,X)"), s) == []

    def test_all_injective_matches(self):
        got = oi_matchers(P("cl(A)"), P("cl(a), cl(b)"))
        assert sorted(m["A"] for m in got) == ["a", "b"]

    def test_accepted_example(self):
        assert oi_subsumes(P("cl(a), on(a,b)"), P("cl(a), on(a,Y)"))

    def test_rejected_example(self):
        assert not oi_subsumes(P("on(X,b), on(b,c)"), P("cl(a), on(a,Y)"))

    def test_variable_may_not_take_pattern_constant(self):
        assert not oi_subsumes(P("on(a,b)"), P("on(X,b), cl(a)"))
        assert not oi_subsumes(P("on(b,b)"), P("on(X,b)"))

    def test_distinct_variables_distinct_images(self):
        assert not oi_subsumes(P("on(a,a)"), P("on(X,Y)"))


class TestGroundings:
    def test_six_ground_states(self):
        schema = flat_schema(["bl1", "bl2", "bl3"])
        got = oi_groundings(P("cl(X), cl(Z), on(X,Y)"), schema)
        assert len(got) == 6
        assert P("cl(bl1), cl(bl3), on(bl1,bl2)") in got

    def test_ground_input(self):
        schema = flat_schema(["a", "b"])
        assert oi_groundings(P("on(a,b)"), schema) == [P("on(a,b)")]

    def test_pairs(self):
        schema = flat_schema(["a", "b"])
        assert oi_groundings(P("on(X,Y)"), schema) == [P("on(a,b)"), P("on(b,a)")]

    @pytest.mark.parametrize("n,v", [(3, 3), (4, 3), (5, 2), (4, 4), (2, 3)])
    def test_falling_factorial(self, n, v):
        schema = Schema([RelationSchema("r", ("obj",) * v)], {f"c{i}": ("obj",) for i in range(n)})
        args = ",".join(f"X{i}" for i in range(v))
        expected = math.perm(n, v)
        assert len(oi_groundings(P(f"r({args})"), schema)) == expected


class TestCanonical:
    def test_signature(self):
        assert signature_string(P("cl(X), cl(Y), on(X,Z)")) == "clclon"
        assert signature_string(()) == ""
        assert signature_string(P("on(X,Y), on(Y,Z), wat(Z)")) == "ononwat"

    def test_canonical_chain(self):
        c = P("on(X,Y), on(Y,Z), wat(Z)")
        assert canonicalize(c) == P("on(V1,V2), on(V2,V3), wat(V3)")
        assert is_canonical(c)

    def test_non_canonical_variant(self):
        c = P("on(X,Y), on(Z,X), wat(Y)")
        assert renumber(c) == P("on(V1,V2), on(V3,V1), wat(V2)")
        assert not is_canonical(c)
        assert canonical_key(c) == canonical_key(P("on(X,Y), on(Y,Z), wat(Z)"))

    def test_single_atom(self):
        assert canonicalize(P("cl(X)")) == P("cl(V1)")

    def test_set_key_ignores_atom_order(self):
        assert set_key(P("wat(Z), on(X,Y), on(Y,Z)")) == set_key(P("on(A,B), on(B,C), wat(C)"))


class TestSensible:
    def test_forbidden_pattern(self, bw3):
        assert not is_sensible(P("cl(X), on(Y,X)"), bw3.constraints, bw3.schema)

    def test_allowed(self, bw3):
        assert is_sensible(P("cl(X), on(X,Y)"), bw3.constraints, bw3.schema)

    def test_empty(self, bw3):
        assert is_sensible((), bw3.constraints, bw3.schema)

    def test_floor_may_hold_many(self, bw3):
        assert is_sensible(P("on(a,fl), on(b,fl)"), bw3.constraints, bw3.schema)
        assert is_sensible(P("on(X,Y), on(Z,Y)"), bw3.constraints, bw3.schema)
        assert not is_sensible(P("on(a,c), on(b,c)"), bw3.constraints, bw3.schema)

    def test_block_variable_may_not_hold_two(self, bw3):
        assert not is_sensible(P("on(X,Y), on(Z,Y), cl(Y)"), bw3.constraints, bw3.schema)

    def test_ill_sorted(self, bw3):
        assert not is_sensible(P("cl(fl)"), bw3.constraints, bw3.schema)

    def test_constraint_without_schema(self):
        k = IntegrityConstraint(P("cl(X), on(Y,X)"))
        assert k.violated_by(P("cl(a), on(b,a)"))


# -- properties ---------------------------------------------------------------

TERMS = ["a", "b", "c", "X", "Y", "Z"]
atoms = st.builds(lambda r, xs: Atom(r, tuple(xs[:2 if r == "on" else 1])),
                  st.sampled_from(["cl", "on"]), st.lists(st.sampled_from(TERMS), min_size=2, max_size=2))
conjunctions = st.lists(atoms, min_size=0, max_size=4, unique=True).map(tuple)


@given(conjunctions)
def test_subsumption_reflexive(c):
    assert oi_subsumes(c, c)


@given(conjunctions, conjunctions, conjunctions)
def test_subsumption_transitive(a, b, c):
    if oi_subsumes(a, b) and oi_subsumes(b, c):
        assert oi_subsumes(a, c)


@given(conjunctions, conjunctions)
def test_matchers_are_injective_embeddings(p, t):
    for theta in oi_matchers(p, t):
        assert set(apply_substitution(p, theta)) <= set(t)
        images = [theta.get(x, x) for x in dict.fromkeys(x for a in p for x in a.args)]
        assert len(images) == len(set(images))


@given(conjunctions, st.randoms(use_true_random=False))
def test_canonical_form_invariant(c, rnd):
    assert is_canonical(canonicalize(c))
    names = ["Q", "R", "S"]
    rnd.shuffle(names)
    renamed = apply_substitution(c, dict(zip(["X", "Y", "Z"], names)))
    assert canonicalize(renamed) == canonicalize(c)
    by_rel = {}
    for a in c:
        by_rel.setdefault(a.rel, []).append(a)
    shuffled = []
    for rel in dict.fromkeys(a.rel for a in c):
        group = list(by_rel[rel])
        rnd.shuffle(group)
        shuffled.extend(group)
    if signature_string(shuffled) == signature_string(c):
        assert canonicalize(tuple(shuffled)) == canonicalize(c)

import pytest
from hypothesis import given, strategies as st

from relpctl.formula import (Formula, PathOp, check_formula, formula_length, parse_formula, render_formula,
                             syntactic_refines)
from relpctl.logic import Atom, SortError
from relpctl.syntax import ParseError, parse_atoms as P


def test_length():
    assert formula_length(Formula(0.6, 4, PathOp.F, P("cl(a), on(b,c)"))) == 2
    assert formula_length(Formula(0.5, 1, PathOp.G, ())) == 0
    target = parse_formula("P>=0.9 F<=3 [on(X0,X1),on(X1,X3),rub(X0),sep(X1),wat(X3)]")
    assert formula_length(target) == 5


def test_parse():
    psi = parse_formula("P>=0.9 F<=3 [on(X0,X1), rub(X0)]")
    assert psi == Formula(0.9, 3, PathOp.F, P("on(X0,X1), rub(X0)"))


def test_render():
    psi = Formula(0.8, 20, PathOp.G, P("lithium(X), in(X,T1)"))
    assert render_formula(psi) == "P>=0.8 G<=20 [lithium(X), in(X,T1)]"


def test_whitespace_inside_brackets():
    assert parse_formula("P>=1 G<=0 [ cl( a ) ,on(a , fl) ]").phi == P("cl(a), on(a,fl)")


def test_empty_formula_round_trip():
    psi = parse_formula("P>=0.5 G<=1 []")
    assert psi.phi == () and parse_formula(render_formula(psi)) == psi


@pytest.mark.parametrize("text", ["P<=0.1 F<=9 [cl(a)]", "P<0.1 F<=9 [cl(a)]"])
def test_upper_bound_rejected(text):
    with pytest.raises(ParseError):
        parse_formula(text)


@pytest.mark.parametrize("text", ["P>=0.9 X<=3 [cl(a)]", "P>=0.9 F<=3 cl(a)", "P>=0.9 F<=3 [cl(a)] x",
                                  "P>=0.9 F<= [cl(a)]", "P>=0.9 F<=3 [Cl(a)]"])
def test_malformed(text):
    with pytest.raises(ParseError) as err:
        parse_formula(text)
    assert err.value.pos >= 0


def test_threshold_range():
    with pytest.raises(ValueError):
        parse_formula("P>=1.5 F<=3 [cl(a)]")
    with pytest.raises(ValueError):
        Formula(-0.1, 1, PathOp.F, ())


def test_action_relation_rejected(bw2):
    with pytest.raises(SortError):
        check_formula(parse_formula("P>=0.9 F<=1 [move(a,b,fl)]"), bw2.schema)
    with pytest.raises(SortError):
        parse_formula("P>=0.9 F<=1 [on(fl,a)]", bw2.schema)


class TestSyntacticRefines:
    def test_g_refines_f(self):
        phi = P("on(X,Y)")
        assert syntactic_refines(Formula(0.8, 3, PathOp.G, phi), Formula(0.8, 3, PathOp.F, phi))
        assert not syntactic_refines(Formula(0.8, 3, PathOp.F, phi), Formula(0.8, 3, PathOp.G, phi))

    def test_instantiation(self):
        child = parse_formula("P>=0.8 F<=3 [lithium(X), in(X,c2)]")
        parent = parse_formula("P>=0.8 F<=3 [lithium(X), in(X,Y)]")
        assert syntactic_refines(child, parent)

    def test_incomparable(self):
        assert not syntactic_refines(parse_formula("P>=0.8 F<=3 [cl(X)]"), parse_formula("P>=0.8 F<=3 [on(X,Y)]"))

    def test_mismatched_parameters(self):
        with pytest.raises(ValueError):
            syntactic_refines(parse_formula("P>=0.8 F<=3 [cl(X)]"), parse_formula("P>=0.9 F<=3 [cl(X)]"))


terms = st.sampled_from(["a", "b", "fl", "X", "Y", "Z0", "W_1"])
atoms = st.builds(lambda r, xs: Atom(r, tuple(xs)), st.sampled_from(["cl", "on", "wat"]),
                  st.lists(terms, min_size=0, max_size=3))


@given(st.floats(0, 1, allow_nan=False), st.integers(0, 50), st.sampled_from(list(PathOp)),
       st.lists(atoms, max_size=5))
def test_round_trip(alpha, k, op, atom_list):
    psi = Formula(alpha, k, op, tuple(atom_list))
    assert parse_formula(render_formula(psi)) == psi

"""Patterns, conditions, symbolic events and transformations."""

import pytest

from shmlenf.parser import (
    parse_condition, parse_event, parse_pattern, parse_symbolic_event, parse_transformation,
    parse_universe,
)
from shmlenf.solver import (
    FragmentExceeded, condition_sat, disjoint_by_enumeration, sat_witness, symbolic_disjoint,
)
from shmlenf.syntax import (
    TAU, Atom, Var, apply_transformation, eval_condition, is_singleton, match_pattern,
    match_symbolic, pattern_equivalent, subst_pattern, pattern_as_event,
)

ev = parse_event
sym = parse_symbolic_event


class TestMatching:
    def test_binders_capture_both_slots(self):
        assert match_pattern(parse_pattern("$x?($y)"), ev("i?(3)")) == {"x": Atom("i"), "y": 3}

    def test_closed_pattern_matches_itself(self):
        assert match_pattern(parse_pattern("i?(3)"), ev("i?(3)")) == {}

    def test_direction_mismatch(self):
        assert match_pattern(parse_pattern("$x?($y)"), ev("i!(3)")) is None

    def test_match_reconstructs_event(self):
        p = parse_pattern("$x?($y)")
        a = ev("j?(req)")
        sigma = match_pattern(p, a)
        assert pattern_as_event(subst_pattern(p, sigma, binders_too=True)) == a

    def test_repeated_binder_requires_equal_values(self):
        p = parse_pattern("$x?($x)")
        assert match_pattern(p, ev("i?(i)")) == {"x": Atom("i")}
        assert match_pattern(p, ev("i?(j)")) is None


class TestConditions:
    def test_greater(self):
        assert eval_condition(parse_condition("$y > 2"), {"y": 3})

    def test_conjunction_of_equalities(self):
        c = parse_condition("$x = i && $y = req")
        assert eval_condition(c, {"x": Atom("i"), "y": Atom("req")})

    def test_le_false(self):
        assert not eval_condition(parse_condition("$y <= 2"), {"y": 3})

    def test_ordering_on_atoms_is_false(self):
        assert not eval_condition(parse_condition("$y > 2"), {"y": Atom("req")})


class TestSymbolicEvents:
    def test_condition_filters(self):
        eta = sym("$x?($y) when $y > 2")
        assert match_symbolic(eta, ev("i?(3)")) == {"x": Atom("i"), "y": 3}
        assert match_symbolic(eta, ev("i?(2)")) is None

    def test_shorthand_encoding(self):
        eta = sym("$x?($y) when $x = i && $y = req")
        assert match_symbolic(eta, ev("i?(req)")) == {"x": Atom("i"), "y": Atom("req")}

    def test_singleton(self):
        uni = parse_universe("{i,j,req,ans}")
        assert is_singleton(sym("$x?($y) when $x = i && $y = req"), uni)
        assert not is_singleton(sym("$x?($y) when $y = req"), parse_universe("{i,j,req}"))
        assert not is_singleton(sym("$x?($y) when false"), uni)


class TestTransformations:
    def test_error_report(self):
        t = parse_transformation("i!($x) when $x > 2 -> i!(err($x))")
        out, sigma = apply_transformation(t, ev("i!(3)"))
        assert str(out) == "i!(err(3))" and sigma == {"x": 3}

    def test_suppression(self):
        t = parse_transformation("i!($x) when $x > 2 -> tau")
        assert apply_transformation(t, ev("i!(3)")) == (TAU, {"x": 3})

    def test_identity(self):
        t = parse_transformation("i!($x) when $x > 2 -> i!($x)")
        assert apply_transformation(t, ev("i!(3)")) == (ev("i!(3)"), {"x": 3})

    def test_no_match(self):
        t = parse_transformation("i!($x) when $x > 2 -> tau")
        assert apply_transformation(t, ev("i!(1)")) is None


class TestSolver:
    def test_contradiction(self):
        assert not condition_sat(parse_condition("$y > 2 && $y <= 2"))

    def test_combined_branch_is_satisfiable(self):
        c = parse_condition("($y = req && $x != h) && ($y = req && $x != j)")
        assert condition_sat(c)
        w = sat_witness(c)
        assert eval_condition(c, w)

    def test_congruence(self):
        assert not condition_sat(parse_condition("$x = $z && $x != $z"), outer={"z"})

    def test_membership(self):
        assert condition_sat(parse_condition("$x in {i, j} && $x != i"))
        assert not condition_sat(parse_condition("$x in {i, j} && $x != i && $x != j"))

    def test_variable_ordering_exceeds_fragment(self):
        c = parse_condition("$x < $y && $y < $x")
        with pytest.raises(FragmentExceeded):
            condition_sat(c)
        assert not condition_sat(c, fallback=True)


class TestDisjointness:
    def test_overlap_on_i3(self):
        assert not symbolic_disjoint(sym("$x?(3) when $x != j"), sym("i?($y) when $y > 2"))

    def test_disjoint_by_payload(self):
        assert symbolic_disjoint(sym("$x?(3) when $x != j"), sym("i?($z) when $z <= 2"))

    def test_contradicting_filters(self):
        assert symbolic_disjoint(sym("i?($y) when $y > 2"), sym("i?($z) when $z <= 2"))

    def test_direction(self):
        assert symbolic_disjoint(sym("$x?(req)"), sym("$x!(req)"))

    def test_agrees_with_enumeration(self):
        uni = parse_universe("{i,j,h,req,ans,0,1,2,3,4}")
        pairs = [("$x?(3) when $x != j", "i?($y) when $y > 2"),
                 ("$x?(req) when $x != h", "$y?(req) when $y != j"),
                 ("$x?(req) when $x = h", "$y?(req) when $y = j")]
        for a, b in pairs:
            assert symbolic_disjoint(sym(a), sym(b)) == disjoint_by_enumeration(sym(a), sym(b), uni)


class TestPatternEquivalence:
    def test_renaming(self):
        assert pattern_equivalent(parse_pattern("$x?($y)"), parse_pattern("$a?($b)")) == {"a": "x", "b": "y"}

    def test_value_vs_variable(self):
        assert pattern_equivalent(parse_pattern("$x?($y)"), parse_pattern("i?($y)")) is None

    def test_shared_value(self):
        assert pattern_equivalent(parse_pattern("$x?(5)"), parse_pattern("$a?(5)")) == {"a": "x"}


def test_subject_slot_only_takes_atoms():
    from shmlenf.parser import parse_symbolic_event as sym
    from shmlenf.solver import symbolic_disjoint
    assert symbolic_disjoint(sym("$x?(0) when $x = 1"), sym("$x?($y)"))
    assert symbolic_disjoint(sym("$x?(req) when $x > 0"), sym("$x?(req)"))
    assert not symbolic_disjoint(sym("$x?(0) when $x != i"), sym("$x?($y)"))

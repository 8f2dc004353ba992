"""The normalization pipeline, stage by stage."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from shmlenf import catalog
from shmlenf.formula import FAnd, FF, TT, Nec, alpha_equal, free_lvars
from shmlenf.logic import SHML_NF, classify, satisfies
from shmlenf.normalize import (
    STAGES, EquationSystem, NormalizationError, determinize, embed, is_equi_disjoint,
    is_fully_open, is_normalized, is_standard_form, is_standard_system, is_uniform, normalize,
    open_patterns, optimize, pipeline, reformulate_conditions, standardize, to_equations,
    to_formula, uniformize,
)
from shmlenf.parser import parse_formula, parse_universe
from shmlenf.solver import pairwise_disjoint
from shmlenf.syntax import match_symbolic, Event, Atom
from shmlenf.verify import gen_processes, random_shml

P = parse_formula
CORPUS = list(gen_processes(count=60, seed=21, depth=4))


def lines(sys):
    return str(sys).splitlines()


class TestStandardize:
    def test_phi2(self):
        want = P("([i?(req)][i!(ans)]max X.([i?(req)][i!(ans)]X & [i?(req)][i?(req)]ff)) "
                 "& [i?(req)][i?(req)]ff")
        got = standardize(catalog.formula("phi2"))
        assert alpha_equal(got, want) and is_standard_form(got)

    def test_tt(self):
        assert standardize(TT) == TT

    def test_free_variable_is_lifted(self):
        got = standardize(P("(max Y.([i?(3)]Y & X)) & [i?(3)]ff"))
        assert alpha_equal(got, P("([i?(3)]max Y.[i?(3)]Y) & [i?(3)]ff & X"))


class TestEquations:
    def test_phi2_system(self):
        sys = to_equations(standardize(catalog.formula("phi2")))
        assert lines(sys) == [
            "X0 = [i?(req)]X3 & [i?(req)]X11",
            "X3 = [i!(ans)]X",
            "X11 = [i?(req)]X12",
            "X = [i?(req)]X7 & [i?(req)]X9",
            "X12 = ff",
            "X7 = [i!(ans)]X8",
            "X9 = [i?(req)]X10",
            "X8 = X",
            "X10 = ff",
        ]
        assert is_standard_system(sys)

    def test_constants_and_free(self):
        assert to_equations(TT).to_json() == {
            "principal": "X0", "free": [], "equations": [{"var": "X0", "formula": "tt"}]}
        sys = to_equations(P("Y"))
        assert sys.free == {"Y"} or sorted(sys.free) == ["Y"]


class TestOpening:
    def test_value_slot(self):
        assert lines(open_patterns(to_equations(P("[$x?(5)]ff"))))[0] == "X0 = [$x?($v1) when $v1 = 5]X1"

    def test_closed_pattern(self):
        got = lines(open_patterns(to_equations(P("[i?(req)]ff"))))[0]
        assert got == "X0 = [$v1?($v2) when $v1 = i && $v2 = req]X1"

    def test_open_is_unchanged(self):
        sys = to_equations(P("[$x?($y)]ff"))
        assert lines(open_patterns(sys)) == lines(sys)
        assert is_fully_open(open_patterns(sys))


class TestUniformAndCombined:
    def setup_method(self):
        self.stages = pipeline(catalog.formula("phi3"))

    def test_uniform_patterns(self):
        uni = self.stages["uni"]
        assert lines(uni)[0] == ("X0 = [$z1?($z2) when $z2 = req && $z1 != h]X3 & "
                                 "[$z1?($z2) when $z2 = req && $z1 != j]X11")
        assert is_uniform(uni)

    def test_outputs_untouched(self):
        assert lines(self.stages["comb"])[1] == lines(self.stages["uni"])[1]

    def test_truth_combinations(self):
        first = lines(self.stages["comb"])[0]
        assert first == (
            "X0 = [$z1?($z2) when $z2 = req && $z1 != h && $z1 != j]X3 & "
            "[$z1?($z2) when $z2 = req && $z1 != h && !($z2 = req && $z1 != j)]X3 & "
            "[$z1?($z2) when $z2 = req && $z1 != h && $z1 != j]X11 & "
            "[$z1?($z2) when !($z2 = req && $z1 != h) && $z2 = req && $z1 != j]X11")
        assert is_equi_disjoint(self.stages["comb"])

    def test_single_branch_unchanged(self):
        sys = uniformize(open_patterns(to_equations(P("[$x?(req)]ff"))))
        assert lines(reformulate_conditions(sys)) == lines(sys)


class TestDeterminize:
    def test_phi2_collapse(self):
        nf = pipeline(catalog.formula("phi2"))["nf"]
        assert lines(nf) == [
            "X_{0} = [$z1?($z2) when $z1 = i && $z2 = req]X_{3,11}",
            "X_{3,11} = [$z3!($z4) when $z3 = i && $z4 = ans]X & [$z5?($z6) when $z5 = i && $z6 = req]X_{12}",
            "X = [$z7?($z8) when $z7 = i && $z8 = req]X_{7,9}",
            "X_{12} = ff",
            "X_{7,9} = [$z9!($z10) when $z9 = i && $z10 = ans]X_{8} & [$z11?($z12) when $z11 = i && $z12 = req]X_{10}",
            "X_{8} = X",
            "X_{10} = ff",
        ]
        assert is_normalized(nf)

    def test_already_deterministic(self):
        sys = reformulate_conditions(uniformize(open_patterns(to_equations(standardize(
            catalog.formula("phi0"))))))
        assert len(determinize(sys).equations) == len(sys.pruned().equations)

    def test_ff_member_absorbs(self):
        nf = pipeline(P("[i?(req)]ff & [i?(req)][i!(ans)]ff"))["nf"]
        assert any(line.endswith("= ff") for line in lines(nf))
        assert alpha_equal(normalize(P("[i?(req)]ff & [i?(req)][i!(ans)]ff")), P("[i?(req)]ff"))


class TestClosing:
    def test_phi2_is_unfolded_phi0(self):
        got = normalize(catalog.formula("phi2"))
        assert alpha_equal(got, catalog.formula("phi2_nf"))
        assert classify(got) == SHML_NF

    def test_constant_systems(self):
        assert optimize(to_formula(to_equations(TT))) == TT
        assert optimize(to_formula(to_equations(FF))) == FF

    def test_free_variables_rejected(self):
        with pytest.raises(NormalizationError):
            normalize(P("[i?(req)]Y"))

    def test_optimize(self):
        f = P("max X0.[i?(req)]max X311.([i!(ans)]ff)")
        assert optimize(f) == P("[i?(req)][i!(ans)]ff")
        assert optimize(P("max X.[i?(req)]X")) == P("max X.[i?(req)]X")
        assert optimize(TT) == TT

    def test_phi3_three_way_split(self):
        nf = normalize(catalog.formula("phi3"))
        assert classify(nf) == SHML_NF
        assert isinstance(nf, FAnd) and len(nf.items) == 3
        subjects = [Atom(n) for n in ("h", "j", "k")]
        matched = []
        for branch in nf.items:
            assert isinstance(branch, Nec)
            matched.append(frozenset(s.name for s in subjects
                                     if match_symbolic(branch.event, Event("?", s, Atom("req")))))
        assert sorted(map(sorted, matched)) == [["h"], ["j"], ["k"]]

    def test_tt(self):
        assert normalize(TT) == TT


@pytest.mark.parametrize("name", ["phi0", "phi1", "phi2", "phi3"])
def test_stagewise_preservation_on_catalog(name):
    f = catalog.formula(name)
    st_ = pipeline(f)
    for k in STAGES:
        g = st_[k] if not isinstance(st_[k], EquationSystem) else embed(st_[k])
        for p in CORPUS[:30]:
            assert satisfies(p, g) == satisfies(p, f), (k, str(p))


forms = st.builds(lambda s, d: random_shml(random.Random(s), d), st.integers(0, 10 ** 6), st.integers(0, 5))


@settings(max_examples=100, deadline=None)
@given(forms)
def test_normal_form_and_preservation(f):
    stages = pipeline(f)
    nf = stages["wf"]
    assert classify(nf) == SHML_NF
    assert not free_lvars(nf)
    for k in STAGES:
        g = stages[k] if not isinstance(stages[k], EquationSystem) else embed(stages[k])
        for p in CORPUS[:12]:
            assert satisfies(p, g) == satisfies(p, f), k


@settings(max_examples=60, deadline=None)
@given(forms)
def test_stage_shapes(f):
    stages = pipeline(f)
    assert is_standard_form(stages["sf"])
    assert is_standard_system(stages["eq"])
    assert is_fully_open(stages["open"])
    assert is_uniform(stages["uni"])
    assert is_equi_disjoint(stages["comb"])
    assert is_normalized(stages["nf"])
    for rhs in stages["nf"].equations.values():
        assert pairwise_disjoint([eta for eta, _ in rhs.branches])


@settings(max_examples=60, deadline=None)
@given(forms)
def test_optimize_preserves_semantics(f):
    g = optimize(f)
    for p in CORPUS[:15]:
        assert satisfies(p, g) == satisfies(p, f)

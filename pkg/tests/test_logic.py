"""Formula classification, denotational semantics and satisfaction."""

import random

from hypothesis import given, settings, strategies as st

from shmlenf import catalog
from shmlenf.formula import FAnd, FOr, TT, FF, Max, unfold
from shmlenf.logic import (
    CHML, GENERAL, SHML, SHML_NF, bounded_sat, check_hmt, classify, denot, fixpoint_chain,
    satisfies, satisfies_lts,
)
from shmlenf.parser import parse_formula, parse_process
from shmlenf.process import reachable_lts, union_lts
from shmlenf.verify import DEFAULT_ALPHABET, random_process, random_shml


class TestClassify:
    def test_phi0_normal(self):
        assert classify(catalog.formula("phi0")) == SHML_NF

    def test_phi2_not_normal(self):
        assert classify(catalog.formula("phi2")) == SHML

    def test_mixed_is_general(self):
        assert classify(parse_formula("<i?(req)>tt | [i?(req)]ff")) == GENERAL

    def test_cosafety(self):
        assert classify(parse_formula("min X.(<i?(req)>X | <i!(ans)>tt)")) == CHML


class TestDenotation:
    def test_phi1_over_p1_q1(self):
        lts = union_lts(catalog.process("p1"), catalog.process("q1"))
        got = {lts.labels[s] for s in denot(catalog.formula("phi1"), lts)}
        p1, q1 = catalog.process("p1"), catalog.process("q1")
        p2 = parse_process("i!(ans)." + catalog.PROCESSES["p1"])
        q2 = parse_process("i!(ans)." + catalog.PROCESSES["q1"])
        nil = parse_process("nil")
        assert got == {(0, p1), (0, p2), (0, nil), (1, q2), (1, nil)}
        assert len(lts) == 6

    def test_constants(self):
        lts = reachable_lts(catalog.process("q1"))
        assert denot(TT, lts) == frozenset(lts.states)
        assert denot(FF, lts) == frozenset()

    def test_chain_is_decreasing(self):
        lts = union_lts(catalog.process("p1"), catalog.process("q1"))
        chain = fixpoint_chain(catalog.formula("phi1"), lts)
        assert chain[0] == frozenset(lts.states)
        assert all(b <= a for a, b in zip(chain, chain[1:]))
        assert len(chain) <= len(lts) + 2
        assert chain[-1] == denot(catalog.formula("phi1"), lts)

    def test_weak_and_strong_readings(self):
        # a close behind an internal step is only seen by weak modalities
        p = parse_process("tau.i?(cls).nil")
        f = parse_formula("[i?(cls)]ff")
        assert not satisfies(p, f)
        assert satisfies(p, f, weak=False)
        lts = reachable_lts(p)
        assert lts.init not in denot(f, lts)
        assert lts.init in denot(f, lts, weak=False)


class TestSatisfaction:
    def test_phi1(self):
        assert satisfies(catalog.process("p1"), catalog.formula("phi1"))
        assert not satisfies(catalog.process("q1"), catalog.formula("phi1"))

    def test_tt(self):
        assert satisfies(catalog.process("q1"), TT)

    def test_bounded_sat(self):
        assert bounded_sat(FF, 2) is None
        assert bounded_sat(TT, 1) == parse_process("nil")
        w = bounded_sat(catalog.formula("phi2"), 3)
        assert w is not None and satisfies(w, catalog.formula("phi2"))


class TestHennessyMilner:
    def test_bisimilar_agree(self):
        fs = [catalog.formula(n) for n in ("phi0", "phi1", "phi2")]
        assert check_hmt(catalog.process("p1"), catalog.process("r1"), fs).passed

    def test_distinguishing_formula_noted(self):
        rep = check_hmt(catalog.process("p1"), catalog.process("q1"), [catalog.formula("phi1")])
        assert rep.passed
        assert rep.notes["bisimilar"] is False
        assert rep.notes["distinguishing_formulae"]

    def test_reflexive(self):
        p = catalog.process("q1")
        assert check_hmt(p, p, [catalog.formula("phi2")]).passed


procs = st.builds(lambda s, d: random_process(random.Random(s), DEFAULT_ALPHABET, d),
                  st.integers(0, 10 ** 6), st.integers(0, 5))
forms = st.builds(lambda s, d: random_shml(random.Random(s), d), st.integers(0, 10 ** 6), st.integers(0, 5))


@settings(max_examples=150, deadline=None)
@given(procs, forms)
def test_satisfaction_agrees_with_denotation(p, f):
    lts = reachable_lts(p)
    assert satisfies_lts(lts, lts.init, f) == (lts.init in denot(f, lts))


@settings(max_examples=80, deadline=None)
@given(procs, forms, forms)
def test_set_algebra(p, f, g):
    lts = reachable_lts(p)
    assert denot(FAnd([f, g]), lts) == denot(f, lts) & denot(g, lts)
    assert denot(FOr([f, g]), lts) == denot(f, lts) | denot(g, lts)


@settings(max_examples=80, deadline=None)
@given(procs, forms)
def test_unfolding_invariance(p, f):
    if isinstance(f, Max):
        lts = reachable_lts(p)
        assert denot(f, lts) == denot(unfold(f), lts)

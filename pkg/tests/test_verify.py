"""Corpus generation and corpus-relative checks."""

import random

from shmlenf import catalog
from shmlenf.enforcement import ID, synth_enforcer
from shmlenf.formula import FF
from shmlenf.normalize import normalize
from shmlenf.parser import parse_event, parse_formula
from shmlenf.process import reachable_lts
from shmlenf.terms import NIL
from shmlenf.verify import (
    DEFAULT_ALPHABET, check_enf_mon_bridge, check_equivalence, check_soundness,
    check_transparency, fuzz_enforcement, gen_processes, random_process, random_shml,
    shrink_formula, violation_trace,
)


def test_corpus_is_reproducible():
    a = gen_processes(seed=5, count=20)
    b = gen_processes(seed=5, count=20)
    assert list(map(str, a)) == list(map(str, b))
    assert a.id == "seed=5,depth=4,count=20"


def test_corpus_starts_with_reference_processes():
    c = gen_processes(count=6)
    assert list(c)[:4] == [catalog.process(n) for n in ("p1", "q1", "r1", "s1")]


def test_narrow_alphabet_skips_reference_processes():
    c = gen_processes(alphabet=[parse_event("j?(req)")], count=5, seed=2)
    assert all(catalog.process("p1") != p for p in c)
    assert len(c) == 5


def test_depth_zero_is_nil():
    assert random_process(random.Random(0), DEFAULT_ALPHABET, 0) == NIL


def test_random_formulae_are_closed_safety_formulae():
    from shmlenf.formula import free_lvars
    from shmlenf.logic import SHML_NF, classify
    rng = random.Random(3)
    for _ in range(50):
        f = random_shml(rng, 4)
        assert not free_lvars(f)
        assert classify(f) in {"sHML", SHML_NF}


def test_reference_soundness_and_transparency():
    corpus = gen_processes(count=30, seed=1)
    phi0 = catalog.formula("phi0")
    assert check_soundness(catalog.enforcer("e0"), phi0, corpus)
    assert check_transparency(catalog.enforcer("e0"), phi0, corpus)


def test_e3_unsound_with_witness():
    rep = check_soundness(catalog.enforcer("e3"), catalog.formula("phi0"), gen_processes(count=10))
    assert not rep
    assert any(c["trace"] == "i?(req),i?(req)" for c in rep.counterexamples)


def test_e1_not_transparent():
    rep = check_transparency(catalog.enforcer("e1"), catalog.formula("phi1"), gen_processes(count=10))
    assert not rep
    assert rep.counterexamples[0]["index"] == 0


def test_identity_unsound_for_phi0():
    assert not check_soundness(ID, catalog.formula("phi0"), gen_processes(count=5))


def test_equivalence_report():
    corpus = gen_processes(count=40, seed=9)
    assert check_equivalence(catalog.formula("phi2"), normalize(catalog.formula("phi2")), corpus)
    rep = check_equivalence(catalog.formula("phi0"), parse_formula("[i?(req)]ff"), corpus)
    assert not rep and rep.corpus == corpus.id


def test_bridge():
    rep = check_enf_mon_bridge(catalog.formula("phi0"), gen_processes(count=20))
    assert rep and "monitor" in rep.notes


def test_violation_trace():
    lts = reachable_lts(catalog.process("q1"))
    assert list(map(str, violation_trace(lts, catalog.formula("phi0")))) == ["i?(req)", "i?(req)"]
    assert violation_trace(reachable_lts(catalog.process("p1")), catalog.formula("phi0")) is None


def test_shrink_keeps_failure():
    f = parse_formula("[i?(req)][i!(ans)]ff & [j?(req)]ff")
    small = shrink_formula(f, lambda g: "j?(req)" in str(g))
    assert str(small) == "[j?(req)]ff"


def test_small_fuzz_run():
    res = fuzz_enforcement(n_formulas=10, n_processes=10, seed=4)
    assert res.passed and res.formulas == 10 and res.processes == 100

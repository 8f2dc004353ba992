"""Formula semantics over finite transition systems.

``denot`` is the set-based semantics with fixpoints computed by Tarski
iteration; ``satisfies`` is the coinductive satisfaction relation for the
safety fragment, computed as a greatest set of (state, formula) pairs.
Both push the substitution produced by matching an edge into the
continuation before evaluating it.
"""

from __future__ import annotations

import itertools

from .formula import (
    FF, TT, FAnd, FOr, Fix, LVar, Max, Min, Nec, Pos, _Const, events_of,
    subst_data, unfold,
)
from .lts import Lts
from .report import CheckReport
from .solver import open_constraints, sat_witness
from .syntax import Event, conj, match_symbolic

SHML_NF = "sHML-normal-form"
SHML = "sHML"
CHML = "cHML"
MHML = "mHML"
GENERAL = "general"


# classification

def is_shml(f) -> bool:
    if isinstance(f, (_Const, LVar)):
        return True
    if isinstance(f, FAnd):
        return all(is_shml(i) for i in f.items)
    if isinstance(f, (Nec, Max)):
        return is_shml(f.body)
    return False


def is_chml(f) -> bool:
    if isinstance(f, (_Const, LVar)):
        return True
    if isinstance(f, FOr):
        return all(is_chml(i) for i in f.items)
    if isinstance(f, (Pos, Min)):
        return is_chml(f.body)
    return False


def is_normal_form(f, fallback: bool = True) -> bool:
    """Every conjunction is a conjunction of necessities with disjoint guards."""
    from .solver import pairwise_disjoint
    if isinstance(f, (_Const, LVar)):
        return True
    if isinstance(f, Max):
        return is_normal_form(f.body, fallback)
    if isinstance(f, Nec):
        return is_normal_form(f.body, fallback)
    if isinstance(f, FAnd):
        if not all(isinstance(i, Nec) for i in f.items):
            return False
        if not pairwise_disjoint([i.event for i in f.items], fallback=fallback):
            return False
        return all(is_normal_form(i.body, fallback) for i in f.items)
    return False


def classify(f) -> str:
    if is_shml(f):
        return SHML_NF if is_normal_form(f) else SHML
    if is_chml(f):
        return CHML
    return GENERAL


def is_monitorable(tag: str) -> bool:
    return tag in (SHML_NF, SHML, CHML, MHML)


# denotational semantics

class _Denot:
    def __init__(self, lts: Lts, weak: bool = True):
        self.lts = lts
        self.all = frozenset(lts.states)
        self.memo = {}
        self.vis = lts.visible_edges(weak)

    def ev(self, f, env: dict) -> frozenset:
        key = (f, tuple(sorted(env.items())))
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        out = self._ev(f, env)
        self.memo[key] = out
        return out

    def _ev(self, f, env):
        if isinstance(f, _Const):
            return self.all if f.value else frozenset()
        if isinstance(f, LVar):
            if f.name not in env:
                raise ValueError(f"free logical variable {f.name} without a valuation")
            return env[f.name]
        if isinstance(f, FAnd):
            out = self.all
            for i in f.items:
                out = out & self.ev(i, env)
            return out
        if isinstance(f, FOr):
            out = frozenset()
            for i in f.items:
                out = out | self.ev(i, env)
            return out
        if isinstance(f, (Nec, Pos)):
            res = set()
            for s in self.lts.states:
                hits = []
                for a, t in self.vis[s]:
                    sigma = match_symbolic(f.event, a)
                    if sigma is not None:
                        hits.append(t in self.ev(subst_data(f.body, sigma), env))
                if isinstance(f, Nec) and all(hits):
                    res.add(s)
                elif isinstance(f, Pos) and any(hits):
                    res.add(s)
            return frozenset(res)
        if isinstance(f, Fix):
            cur = self.all if isinstance(f, Max) else frozenset()
            while True:
                nxt = self.ev(f.body, {**env, f.var: cur})
                if nxt == cur:
                    return cur
                cur = nxt
        raise TypeError(f"not a formula: {f!r}")


def denot(f, lts: Lts, rho=None, weak: bool = True) -> frozenset:
    """State indices of ``lts`` satisfying ``f`` under valuation ``rho``.

    Modalities range over weak moves (tau* a tau*) unless ``weak`` is off;
    on tau-free systems both readings coincide.
    """
    env = {k: frozenset(v) for k, v in (rho or {}).items()}
    return _Denot(lts, weak).ev(f, env)


def fixpoint_chain(f, lts: Lts, rho=None, weak: bool = True) -> list:
    """The successive approximants of a top-level fixpoint."""
    assert isinstance(f, Fix)
    d = _Denot(lts, weak)
    env = {k: frozenset(v) for k, v in (rho or {}).items()}
    cur = d.all if isinstance(f, Max) else frozenset()
    chain = [cur]
    while True:
        nxt = d.ev(f.body, {**env, f.var: cur})
        chain.append(nxt)
        if nxt == cur:
            return chain
        cur = nxt


# satisfaction relation for the safety fragment

def satisfies_lts(lts: Lts, state: int, f, weak: bool = True) -> bool:
    if not is_shml(f):
        return state in denot(f, lts, weak=weak)
    return state in satisfaction_set(lts, f, [state], weak)


class _Moves:
    """Visible moves computed on demand, kept apart from ``Lts.visible_edges``
    so the two semantics stay independent oracles."""

    def __init__(self, lts: Lts, weak: bool):
        self.lts = lts
        self.weak = weak
        self.cache = {}

    def _silent(self, s):
        seen = [s]
        found = {s}
        for x in seen:
            for a, y in self.lts.succ[x]:
                if not isinstance(a, Event) and y not in found:
                    found.add(y)
                    seen.append(y)
        return seen

    def __getitem__(self, s):
        hit = self.cache.get(s)
        if hit is not None:
            return hit
        if not self.weak:
            out = [(a, t) for a, t in self.lts.succ[s] if isinstance(a, Event)]
        else:
            out = []
            for x in self._silent(s):
                for a, y in self.lts.succ[x]:
                    if isinstance(a, Event):
                        out.extend((a, z) for z in self._silent(y))
            out = list(dict.fromkeys(out))
        self.cache[s] = out
        return out


def satisfaction_set(lts: Lts, f, roots, weak: bool = True) -> set:
    """States among ``roots`` related to ``f`` by the largest satisfaction relation."""
    vis = _Moves(lts, weak)
    reqs = {}
    false = set()
    stack = [(s, f) for s in roots]
    while stack:
        pair = stack.pop()
        if pair in reqs:
            continue
        s, g = pair
        need = []
        if isinstance(g, _Const):
            if not g.value:
                false.add(pair)
        elif isinstance(g, FAnd):
            need = [(s, i) for i in g.items]
        elif isinstance(g, Nec):
            for a, t in vis[s]:
                sigma = match_symbolic(g.event, a)
                if sigma is not None:
                    need.append((t, subst_data(g.body, sigma)))
        elif isinstance(g, Max):
            need = [(s, unfold(g))]
        elif isinstance(g, LVar):
            raise ValueError(f"free logical variable {g.name}")
        else:
            raise ValueError(f"not a safety formula: {g}")
        reqs[pair] = need
        stack.extend(n for n in need if n not in reqs)
    # remove pairs until every remaining pair only needs remaining pairs
    rdeps = {}
    for pair, need in reqs.items():
        for n in need:
            rdeps.setdefault(n, []).append(pair)
    work = list(false)
    while work:
        bad = work.pop()
        for parent in rdeps.get(bad, ()):
            if parent not in false:
                false.add(parent)
                work.append(parent)
    return {s for s in roots if (s, f) not in false}


def satisfies(p, f, weak: bool = True) -> bool:
    from .process import reachable_lts
    lts = reachable_lts(p)
    return satisfies_lts(lts, lts.init, f, weak)


# bounded satisfiability

def witness_events(f) -> list:
    """One concrete event per symbolic event of ``f`` (where one exists)."""
    out = []
    for eta in events_of(f):
        c = conj(open_constraints(eta.pattern), eta.condition)
        try:
            w = sat_witness(c)
        except Exception:
            w = None
        if w is None:
            continue
        ev = Event(eta.pattern.kind, w["_s"], w["_p"])
        from .syntax import Atom
        if isinstance(ev.subject, Atom) and ev not in out:
            out.append(ev)
    return out


def lts_to_term(n: int, edges: dict, start: int = 0):
    """Regular CCS term for a finite system given as {state: [(action, target)]}."""
    from .terms import NIL, Prefix, Rec, RVar, choice

    def build(i, open_):
        branches = []
        for a, j in edges.get(i, []):
            if j in open_ or j == i:
                branches.append(Prefix(a, RVar(f"x{j}")))
            else:
                branches.append(Prefix(a, build(j, open_ | {i})))
        body = choice(*branches) if branches else NIL
        from .terms import rec_referenced
        return Rec(f"x{i}", body) if rec_referenced(body, f"x{i}") else body

    return build(start, frozenset())


def bounded_sat(f, k: int = 3, max_candidates: int = 20000):
    """A process satisfying ``f`` with at most ``k`` states, or None (unknown)."""
    from .process import reachable_lts
    alphabet = witness_events(f)
    tried = 0
    for n in range(1, k + 1):
        slots = [(i, a) for i in range(n) for a in range(len(alphabet))]
        for targets in itertools.product(range(-1, n), repeat=len(slots)):
            tried += 1
            if tried > max_candidates:
                return None
            edges = {}
            for (i, a), t in zip(slots, targets):
                if t >= 0:
                    edges.setdefault(i, []).append((alphabet[a], t))
            term = lts_to_term(n, edges)
            lts = reachable_lts(term)
            if satisfies_lts(lts, lts.init, f):
                return term
    return None


# Hennessy-Milner check

def check_hmt(p, q, formulae) -> CheckReport:
    """Bisimilar processes must agree on every formula of the corpus."""
    from .process import weak_bisim
    # weak modalities characterize weak bisimilarity
    rep = CheckReport("hennessy-milner")
    bis = weak_bisim(p, q)
    rep.notes["bisimilar"] = bis.equivalent
    distinguishing = []
    for f in formulae:
        rep.checked += 1
        a, b = satisfies(p, f), satisfies(q, f)
        if a != b:
            distinguishing.append(str(f))
            if bis.equivalent:
                rep.fail(formula=f, left=a, right=b)
    rep.notes["distinguishing_formulae"] = distinguishing
    if not bis.equivalent:
        rep.notes["distinguishing_moves"] = bis.distinguishing
    return rep

"""Corpus generation, formula fuzzing and corpus-relative property checks.

Every verdict here is relative to a finite corpus: a pass means no
counterexample was found, never that a universal property was proven.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field

from .enforcement import check_determinism, enforced_lts, is_well_formed, synth_enforcer
from .formula import FAnd, FF, LVar, Max, Nec, TT, free_lvars
from .lts import Lts, bisimilar
from .process import reachable_lts
from .report import CheckReport
from .syntax import (
    TAU, Atom, Cmp, Event, Pattern, Ref, SymbolicEvent, TRUE, Var, is_tau,
)
from .terms import NIL, Choice, Prefix, Rec, RVar

REQ, ANS, CLS = Atom("req"), Atom("ans"), Atom("cls")
I, J = Atom("i"), Atom("j")

DEFAULT_ALPHABET = (
    Event("?", I, REQ), Event("!", I, ANS), Event("?", I, CLS),
    Event("?", J, REQ), Event("!", J, ANS),
)

# weights for the formula fuzzer: necessity, conjunction, max, ff, tt
FORMULA_WEIGHTS = (("nec", 40), ("and", 25), ("max", 15), ("ff", 10), ("tt", 10))


# processes

@dataclass
class Corpus:
    seed: int
    alphabet: tuple
    depth: int
    count: int
    processes: list = field(default_factory=list)

    @property
    def id(self) -> str:
        return f"seed={self.seed},depth={self.depth},count={self.count}"

    def __iter__(self):
        return iter(self.processes)

    def __len__(self):
        return len(self.processes)

    def __getitem__(self, k):
        return self.processes[k]


def _named_processes(alphabet) -> list:
    from . import catalog
    need = {Event("?", I, REQ), Event("!", I, ANS), Event("?", I, CLS)}
    if not need <= set(alphabet):
        return []
    return [catalog.process(n) for n in ("p1", "q1", "r1", "s1")]


def random_process(rng: random.Random, alphabet, depth: int, tau_rate: float = 0.1):
    """A closed, guarded regular CCS term of nesting depth at most ``depth``."""
    alphabet = list(alphabet)
    counter = [0]

    def gen(d, bound, guarded):
        if d <= 0:
            if guarded and bound and rng.random() < 0.5:
                return RVar(rng.choice(bound))
            return NIL
        opts = [("prefix", 6), ("choice", 2), ("rec", 1), ("nil", 1)]
        if guarded and bound:
            opts.append(("var", 2))
        kind = rng.choices([o for o, _ in opts], [w for _, w in opts])[0]
        if kind == "nil":
            return NIL
        if kind == "var":
            return RVar(rng.choice(bound))
        if kind == "prefix":
            act = TAU if rng.random() < tau_rate else rng.choice(alphabet)
            return Prefix(act, gen(d - 1, bound, True))
        if kind == "choice":
            items = [gen(d - 1, bound, guarded) for _ in range(rng.randint(2, 3))]
            return Choice(items)
        counter[0] += 1
        x = f"x{counter[0]}"
        return Rec(x, gen(d - 1, bound + [x], False))

    return gen(depth, [], True)


def gen_processes(alphabet=DEFAULT_ALPHABET, depth: int = 4, count: int = 50, seed: int = 0) -> Corpus:
    """Reproducible corpus; the named reference processes come first when the
    alphabet covers their actions."""
    alphabet = tuple(alphabet)
    if not alphabet:
        raise ValueError("alphabet must be nonempty")
    rng = random.Random(seed)
    procs = _named_processes(alphabet)[:count]
    while len(procs) < count:
        procs.append(random_process(rng, alphabet, depth))
    return Corpus(seed, alphabet, depth, count, procs)


def random_traces(rng: random.Random, alphabet, count: int = 20, max_len: int = 6) -> list:
    alphabet = list(alphabet)
    return [[rng.choice(alphabet) for _ in range(rng.randint(0, max_len))] for _ in range(count)]


# formulae

def _random_event(rng: random.Random, scope: list):
    kind, payload = rng.choice([("?", REQ), ("!", ANS), ("?", CLS)])
    r = rng.random()
    if scope and r < 0.25:
        return SymbolicEvent(Pattern(kind, Ref(rng.choice(scope)), payload)), None
    if r < 0.6:
        return SymbolicEvent(Pattern(kind, rng.choice([I, J]), payload)), None
    name = f"x{len(scope) + 1}"
    cond = TRUE
    c = rng.random()
    if c < 0.3:
        cond = Cmp("!=", Var(name), rng.choice([I, J]))
    elif c < 0.45:
        cond = Cmp("=", Var(name), rng.choice([I, J]))
    return SymbolicEvent(Pattern(kind, Var(name), payload), cond), name


def random_shml(rng: random.Random, depth: int = 4):
    """A closed sHML formula; logical variables only occur guarded."""
    counter = [0]
    kinds = [k for k, _ in FORMULA_WEIGHTS]
    weights = [w for _, w in FORMULA_WEIGHTS]

    def leaf(lvars, guarded):
        if lvars and guarded and rng.random() < 0.5:
            return LVar(rng.choice(lvars))
        return TT if rng.random() < 0.5 else FF

    def gen(d, lvars, scope, guarded):
        if d <= 0:
            return leaf(lvars, guarded)
        k = rng.choices(kinds, weights)[0]
        if k == "tt":
            return TT
        if k == "ff":
            return FF
        if k == "nec":
            eta, b = _random_event(rng, scope)
            return Nec(eta, gen(d - 1, lvars, scope + ([b] if b else []), True))
        if k == "and":
            return FAnd([gen(d - 1, lvars, scope, guarded) for _ in range(2)])
        counter[0] += 1
        x = f"X{counter[0]}"
        return Max(x, gen(d - 1, lvars + [x], scope, False))

    return gen(depth, [], [], True)


def _subformula_edits(f):
    """Smaller closed variants of ``f`` for shrinking."""
    out = [TT, FF]
    if isinstance(f, FAnd):
        items = list(f.items)
        out.extend(items)
        for k in range(len(items)):
            rest = items[:k] + items[k + 1:]
            out.append(rest[0] if len(rest) == 1 else FAnd(rest))
        for k, i in enumerate(items):
            for s in _subformula_edits(i):
                out.append(FAnd(items[:k] + [s] + items[k + 1:]))
    elif isinstance(f, Nec):
        if not f.event.binders():
            out.append(f.body)
        for s in _subformula_edits(f.body):
            out.append(Nec(f.event, s))
    elif isinstance(f, Max):
        if f.var not in free_lvars(f.body):
            out.append(f.body)
        for s in _subformula_edits(f.body):
            out.append(Max(f.var, s))
    return out


def shrink_formula(f, fails, max_steps: int = 200):
    """Greedily minimize ``f`` while ``fails(f)`` stays true."""
    from .formula import fsize
    from .logic import is_shml
    steps = 0
    improved = True
    while improved and steps < max_steps:
        improved = False
        for g in sorted(_subformula_edits(f), key=fsize):
            steps += 1
            if fsize(g) >= fsize(f) or free_lvars(g) or not is_shml(g):
                continue
            try:
                bad = fails(g)
            except Exception:
                bad = False
            if bad:
                f = g
                improved = True
                break
    return f


# property checks

def violation_trace(lts: Lts, f) -> list | None:
    """Shortest visible trace from the initial state leading a monitor for
    ``f`` to a rejection, or None."""
    from .detection import monitor_step, synth_monitor, verdict
    m0 = synth_monitor(f)
    start = (lts.init, m0)
    parent = {start: None}
    queue = deque([start])
    while queue:
        conf = queue.popleft()
        s, m = conf
        if verdict(m) == "no":
            path = []
            while parent[conf] is not None:
                conf, a = parent[conf]
                if not is_tau(a):
                    path.append(a)
            return path[::-1]
        if verdict(m) == "end" or verdict(m) == "yes":
            continue
        for a, t in lts.succ[s]:
            nxt = [m] if is_tau(a) else list(monitor_step(m, a))
            for m2 in nxt:
                c2 = (t, m2)
                if c2 not in parent:
                    parent[c2] = (conf, a)
                    queue.append(c2)
    return None


def _corpus_name(corpus) -> str:
    return corpus.id if isinstance(corpus, Corpus) else f"{len(list(corpus))} processes"


def check_soundness(e, f, corpus) -> CheckReport:
    """Every enforced process of the corpus must satisfy ``f``."""
    from .logic import satisfies_lts
    rep = CheckReport("soundness", corpus=_corpus_name(corpus))
    for k, p in enumerate(corpus):
        rep.checked += 1
        lts = enforced_lts(e, p)
        if not satisfies_lts(lts, lts.init, f):
            tr = violation_trace(lts, f)
            rep.fail(index=k, process=str(p),
                     trace=None if tr is None else ",".join(map(str, tr)))
    return rep


def check_transparency(e, f, corpus) -> CheckReport:
    """Enforced processes that already satisfy ``f`` must be bisimilar to the original."""
    from .logic import satisfies_lts
    rep = CheckReport("transparency", corpus=_corpus_name(corpus))
    vacuous = 0
    for k, p in enumerate(corpus):
        plts = reachable_lts(p)
        if not satisfies_lts(plts, plts.init, f):
            vacuous += 1
            continue
        rep.checked += 1
        res = bisimilar(enforced_lts(e, p), plts)
        if not res:
            rep.fail(index=k, process=str(p),
                     moves=[f"{side}:{a}" for side, a in res.distinguishing])
    rep.notes["skipped_violating"] = vacuous
    return rep


def check_equivalence(f, g, corpus) -> CheckReport:
    from .logic import satisfies
    rep = CheckReport("equivalence", corpus=_corpus_name(corpus))
    for k, p in enumerate(corpus):
        rep.checked += 1
        a, b = satisfies(p, f), satisfies(p, g)
        if a != b:
            rep.fail(index=k, process=str(p), left=a, right=b)
    return rep


def check_enf_mon_bridge(f, corpus, bound=None) -> CheckReport:
    """A rejection by the synthesized monitor must imply violation; violations
    the monitor misses are reported as notes (corpus-relative completeness)."""
    from .detection import rejects, synth_monitor
    from .logic import satisfies
    rep = CheckReport("bridge", corpus=_corpus_name(corpus))
    m = synth_monitor(f)
    missed = []
    for k, p in enumerate(corpus):
        rep.checked += 1
        rej = rejects(p, m, bound)
        sat = satisfies(p, f)
        if rej and sat:
            rep.fail(index=k, process=str(p), rejected=True, satisfies=True)
        elif not rej and not sat:
            missed.append(k)
    rep.notes["monitor"] = str(m)
    rep.notes["violations_not_rejected"] = missed
    return rep


# the enforcement fuzz pipeline

@dataclass
class FuzzResult:
    formulas: int = 0
    processes: int = 0
    satisfying_pairs: int = 0
    failures: list = field(default_factory=list)
    cases: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def fuzz_case(f, corpus, traces):
    """Run every enforcement check for one formula.

    Returns (failures, satisfying pairs) where failures maps a check name to
    its counterexamples.
    """
    from .normalize import normalize
    nf = normalize(f)
    e = synth_enforcer(nf)
    failures = {}
    if not is_well_formed(e):
        failures["well-formedness"] = [str(e)]
    for rep in (check_determinism(e, traces), check_soundness(e, f, corpus)):
        if not rep:
            failures[rep.name] = rep.counterexamples[:3]
    tr = check_transparency(e, f, corpus)
    if not tr:
        failures[tr.name] = tr.counterexamples[:3]
    return failures, tr.checked


def fuzz_enforcement(n_formulas: int = 200, n_processes: int = 50, depth: int = 5,
                     proc_depth: int = 5, n_traces: int = 20, trace_len: int = 6,
                     seed: int = 0, shrink: bool = True, keep_cases: bool = False) -> FuzzResult:
    """Random sHML formulae through normalize, synthesis and all enforcement checks.

    With ``keep_cases`` the (formula, corpus) pairs are kept for reuse by
    other oracles.
    """
    from .logic import bounded_sat
    rng = random.Random(seed)
    res = FuzzResult()
    while res.formulas < n_formulas:
        f = random_shml(rng, depth)
        if f == FF:
            continue
        corpus = gen_processes(DEFAULT_ALPHABET, proc_depth, n_processes, rng.randrange(1 << 30))
        traces = random_traces(rng, DEFAULT_ALPHABET, n_traces, trace_len)
        try:
            failures, sat_pairs = fuzz_case(f, corpus, traces)
        except Exception as exc:  # synthesis errors count as failures
            if _unsatisfiable(f, bounded_sat):
                continue
            failures, sat_pairs = {"error": [str(exc)]}, 0
        res.formulas += 1
        res.processes += len(corpus)
        if keep_cases:
            res.cases.append((f, corpus))
        res.satisfying_pairs += sat_pairs
        if failures:
            small = f
            if shrink:
                small = shrink_formula(f, lambda g: bool(_safe_case(g, corpus, traces)))
            res.failures.append({"formula": str(f), "shrunk": str(small), "corpus": corpus.id,
                                 "failed": failures})
    return res


def _safe_case(f, corpus, traces):
    from .normalize import normalize
    try:
        return fuzz_case(f, corpus, traces)[0]
    except Exception as exc:
        try:
            if normalize(f) == FF:
                return {}
        except Exception:
            pass
        return {"error": [str(exc)]}


def _unsatisfiable(f, bounded_sat) -> bool:
    try:
        return bounded_sat(f) is None
    except Exception:
        return False

"""Suppression enforcers: dynamics, instrumentation, synthesis and checks."""

from __future__ import annotations

from .formula import FAnd, FF, LVar, Max, Nec, TT, _Const
from .lts import DEFAULT_BUDGET, Lts
from .report import CheckReport
from .solver import symbolic_disjoint
from .syntax import TAU, Pattern, Ref, SymbolicTransformation, Tagged, Var, is_tau
from .terms import (
    Choice, Leaf, Prefix, Rec, RVar, UnguardedError, check_guarded, drop_unused_recs,
    free_data_vars, free_rec_vars, subst_data, subst_rec, unfold,
)
from .detection import lvar_to_rec

ID = Leaf("id")


class EnforcerError(ValueError):
    pass


class NotNormalForm(ValueError):
    pass


class SynthesisError(ValueError):
    pass


def validate(e):
    """Check that ``e`` is a closed, guarded, tau-free enforcer and return it."""
    free = free_rec_vars(e)
    if free:
        raise EnforcerError(f"free recursion variables: {', '.join(sorted(free))}")
    try:
        check_guarded(e)
    except UnguardedError as exc:
        raise EnforcerError(str(exc)) from None
    if free_data_vars(e):
        raise EnforcerError(f"unbound data variables: {', '.join(sorted(free_data_vars(e)))}")
    _check(e)
    return e


def _check(e):
    if isinstance(e, Leaf):
        if e.name != "id":
            raise EnforcerError(f"unexpected leaf {e.name} in an enforcer")
    elif isinstance(e, Prefix):
        if not isinstance(e.guard, SymbolicTransformation):
            raise EnforcerError(f"enforcer prefix must be a transformation, got {e.guard}")
        if not e.guard.well_formed():
            raise EnforcerError(f"replacement uses unbound variables: {e.guard}")
        _check(e.cont)
    elif isinstance(e, Choice):
        for i in e.items:
            _check(i)
    elif isinstance(e, Rec):
        _check(e.body)


# dynamics

def _moves(e, out, depth=0):
    if depth > 10000:
        raise UnguardedError("unguarded recursion")
    if isinstance(e, Leaf):
        out.append(None)
    elif isinstance(e, Prefix):
        out.append((e.guard, e.cont))
    elif isinstance(e, Choice):
        for i in e.items:
            _moves(i, out, depth)
    elif isinstance(e, Rec):
        _moves(unfold(e), out, depth + 1)


def enforcer_step(e, a) -> set:
    """All (output, successor) pairs of enforcer ``e`` on input event ``a``."""
    from .syntax import apply_transformation
    moves = []
    _moves(e, moves)
    out = set()
    for m in moves:
        if m is None:
            out.add((a, ID))
            continue
        g, cont = m
        r = apply_transformation(g, a)
        if r is not None:
            b, sigma = r
            out.add((b, subst_data(cont, sigma)))
    return out


def enforced_successors(conf) -> list:
    """Moves of the enforced system ``(e, p)``; the process leads."""
    from .terms import transitions
    e, p = conf
    out = []
    for mu, q in transitions(p):
        if is_tau(mu):
            out.append((TAU, (e, q)))
            continue
        res = enforcer_step(e, mu)
        if not res:
            out.append((mu, (ID, q)))
        for b, e2 in sorted(res, key=str):
            out.append((b, (e2, q)))
    return out


def enforced_step(conf, mu=None) -> set:
    """Successor configurations paired with the emitted action.

    With ``mu`` given, only process moves labelled ``mu`` are considered.
    """
    from .terms import transitions
    e, p = conf
    out = set()
    for a, q in transitions(p):
        if mu is not None and a != mu:
            continue
        if is_tau(a):
            out.add((TAU, (e, q)))
            continue
        res = enforcer_step(e, a)
        if not res:
            out.add((a, (ID, q)))
        for b, e2 in res:
            out.add((b, (e2, q)))
    return out


def enforced_lts(e, p, budget: int = DEFAULT_BUDGET) -> Lts:
    return Lts.explore((e, p), enforced_successors, budget)


def run_enforcer(e, trace) -> set:
    """Every (outputs, final enforcer) reachable by feeding ``trace`` to ``e``.

    A blocked enforcer forwards the event and becomes ``id``.
    """
    current = {((), e)}
    for a in trace:
        nxt = set()
        for outs, x in current:
            res = enforcer_step(x, a)
            if not res:
                nxt.add((outs + (a,), ID))
            for b, y in res:
                nxt.add((outs + (b,), y))
        current = nxt
    return current


def simulate(e, trace) -> list:
    """Output sequences of ``e`` over ``trace``, sorted for stable display."""
    outs = {o for o, _ in run_enforcer(e, trace)}
    return sorted(outs, key=lambda o: [str(x) for x in o])


def observable(outputs) -> list:
    """Drop suppressed (tau) outputs."""
    return [a for a in outputs if not is_tau(a)]


def simulate_process(e, p, trace) -> set:
    """Emitted sequences of ``e[p]`` when the process performs ``trace``.

    ``trace`` lists process actions (tau included if the process takes one).
    """
    current = {((), (e, p))}
    for mu in trace:
        nxt = set()
        for outs, conf in current:
            for b, c2 in enforced_step(conf, mu):
                nxt.add((outs + (b,), c2))
        current = nxt
    return {o for o, _ in current}


# synthesis

def _source_as_output(pat: Pattern) -> Pattern:
    def slot(s):
        if isinstance(s, Var):
            return Ref(s.name)
        if isinstance(s, Tagged):
            return Tagged(s.tag, slot(s.arg))
        return s
    return Pattern(pat.kind, slot(pat.subject), slot(pat.payload))


class _Names:
    def __init__(self):
        self.n = 0

    def fresh(self) -> str:
        self.n += 1
        return f"#{self.n}"


def _g(f, rho, names):
    if isinstance(f, _Const):
        if f.value:
            return ID
        if rho is None:
            raise SynthesisError("ff has no enforcer outside a modality")
        return RVar(rho)
    if isinstance(f, LVar):
        return RVar(lvar_to_rec(f.name))
    if isinstance(f, Max):
        return Rec(lvar_to_rec(f.var), _g(f.body, rho, names))
    items = f.items if isinstance(f, FAnd) else [f]
    if not all(isinstance(i, Nec) for i in items):
        raise NotNormalForm(f"expected a conjunction of necessities: {f}")
    y = names.fresh()
    branches = []
    for i in items:
        if i.body == FF:
            rep = TAU
        else:
            rep = _source_as_output(i.event.pattern)
        branches.append(Prefix(SymbolicTransformation(i.event, rep), _g(i.body, y, names)))
    body = branches[0] if len(branches) == 1 else Choice(branches)
    return Rec(y, body)


def _rename_placeholders(e, taken: set):
    """Give the synthesis' fresh binders readable names y, y1, y2, ..."""
    counter = [0]

    def pick():
        while True:
            name = "y" if counter[0] == 0 else f"y{counter[0]}"
            counter[0] += 1
            if name not in taken:
                return name

    def walk(t):
        if isinstance(t, Prefix):
            return Prefix(t.guard, walk(t.cont))
        if isinstance(t, Choice):
            return Choice([walk(i) for i in t.items])
        if isinstance(t, Rec):
            if t.var.startswith("#"):
                new = pick()
                return Rec(new, walk(subst_rec(t.body, t.var, RVar(new))))
            return Rec(t.var, walk(t.body))
        return t
    return walk(e)


def _rec_names(t, out):
    if isinstance(t, Rec):
        out.add(t.var)
        _rec_names(t.body, out)
    elif isinstance(t, Prefix):
        _rec_names(t.cont, out)
    elif isinstance(t, Choice):
        for i in t.items:
            _rec_names(i, out)
    elif isinstance(t, RVar):
        out.add(t.name)
    return out


def synth_enforcer(f, normalize_first: bool = False):
    """Enforcer for a normalized safety formula."""
    from .formula import free_lvars
    from .logic import is_normal_form
    from .normalize import normalize, optimize
    if free_lvars(f):
        raise SynthesisError(f"formula has free variables: {', '.join(sorted(free_lvars(f)))}")
    if normalize_first and not is_normal_form(f):
        f = normalize(f)
    if not is_normal_form(f):
        raise NotNormalForm(f"formula is not in normal form: {f}")
    f = optimize(f)
    if f == FF:
        raise SynthesisError("ff cannot be enforced by suppression")
    e = drop_unused_recs(_g(f, None, _Names()))
    taken = {n for n in _rec_names(e, set()) if not n.startswith("#")}
    return _rename_placeholders(e, taken)


# static checks

def is_well_formed(e, fallback: bool = True) -> bool:
    """Sums of transformation prefixes with pairwise disjoint sources."""
    if isinstance(e, (Leaf, RVar)):
        return not isinstance(e, Leaf) or e.name == "id"
    if isinstance(e, Rec):
        return is_well_formed(e.body, fallback)
    items = e.items if isinstance(e, Choice) else [e]
    if not all(isinstance(i, Prefix) for i in items):
        return False
    srcs = []
    for i in items:
        if not isinstance(i.guard, SymbolicTransformation) or not i.guard.well_formed():
            return False
        srcs.append(i.guard.source)
    for k in range(len(srcs)):
        for j in range(k + 1, len(srcs)):
            if not symbolic_disjoint(srcs[k], srcs[j], fallback=fallback):
                return False
    return all(is_well_formed(i.cont, fallback) for i in items)


def check_determinism(e, traces, corpus: str = "") -> CheckReport:
    """Every trace must yield exactly one (outputs, final enforcer) outcome."""
    rep = CheckReport("determinism", corpus=corpus)
    for t in traces:
        t = list(t)
        rep.checked += 1
        outcomes = run_enforcer(e, t)
        if len(outcomes) != 1:
            rep.fail(trace=",".join(map(str, t)),
                     outcomes=sorted([",".join(map(str, o)) + " => " + str(x) for o, x in outcomes]))
    return rep


def is_identity(g: SymbolicTransformation) -> bool:
    return g.replacement is not TAU and g.replacement == _source_as_output(g.source.pattern)

"""Regular CCS processes: reduction, reachable LTS, traces and bisimilarity."""

from __future__ import annotations

from .lts import DEFAULT_BUDGET, Lts, bisimilar
from .syntax import TAU, Event
from .terms import NIL, Choice, Leaf, Prefix, Rec, RVar, check_guarded, free_rec_vars, transitions


class ProcessError(ValueError):
    pass


def validate(p):
    """Closed, guarded, and labelled with concrete actions only."""
    free = free_rec_vars(p)
    if free:
        raise ProcessError(f"free process variables: {', '.join(sorted(free))}")
    check_guarded(p)
    _check_actions(p)
    return p


def _check_actions(p):
    if isinstance(p, Prefix):
        if not (isinstance(p.guard, Event) or p.guard is TAU):
            raise ProcessError(f"process prefix must be a concrete action, got {p.guard}")
        _check_actions(p.cont)
    elif isinstance(p, Choice):
        for i in p.items:
            _check_actions(i)
    elif isinstance(p, Rec):
        _check_actions(p.body)
    elif isinstance(p, Leaf) and p.name != "nil":
        raise ProcessError(f"unexpected leaf {p.name} in a process")


def successors(p) -> list:
    return transitions(p)


def step(p, mu) -> set:
    return {q for a, q in transitions(p) if a == mu}


def reachable_lts(p, budget: int = DEFAULT_BUDGET) -> Lts:
    return Lts.explore(p, successors, budget)


def tau_closure(p) -> set:
    seen = {p}
    stack = [p]
    while stack:
        x = stack.pop()
        for a, y in transitions(x):
            if a is TAU and y not in seen:
                seen.add(y)
                stack.append(y)
    return seen


def weak_step(p, mu) -> set:
    if mu is TAU:
        return tau_closure(p)
    out = set()
    for x in tau_closure(p):
        for a, y in transitions(x):
            if a == mu:
                out |= tau_closure(y)
    return out


def run_trace(p, trace) -> set:
    current = tau_closure(p)
    for a in trace:
        nxt = set()
        for x in current:
            nxt |= weak_step(x, a)
        current = nxt
    return current


def strong_bisim(p, q):
    return bisimilar(reachable_lts(p), reachable_lts(q))


def weak_bisim(p, q):
    return bisimilar(reachable_lts(p).saturate(), reachable_lts(q).saturate())


def union_lts(*procs) -> Lts:
    """Disjoint union of the reachable systems of several processes."""
    lts = None
    for k, p in enumerate(procs):
        part = reachable_lts(p)
        part = Lts([(k, l) for l in part.labels], part.succ, part.init)
        if lts is None:
            lts = part
        else:
            n = len(lts)
            lts = Lts(lts.labels + part.labels,
                      lts.succ + [[(a, t + n) for a, t in o] for o in part.succ], lts.init)
    return lts

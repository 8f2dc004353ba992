"""Detection monitors: synthesis, reduction rules and monitored systems."""

from __future__ import annotations

from collections import deque

from .formula import FAnd, FOr, LVar, Max, Min, Nec, Pos, _Const
from .lts import DEFAULT_BUDGET, Lts
from .report import CheckReport
from .syntax import TAU, SymbolicEvent, match_symbolic
from .terms import (
    Choice, Leaf, Prefix, Rec, RVar, check_guarded, drop_unused_recs, free_data_vars,
    free_rec_vars, subst_data, transitions, unfold,
)

YES = Leaf("yes")
NO = Leaf("no")
END = Leaf("end")
VERDICTS = {"yes", "no", "end"}


class NotMonitorable(ValueError):
    pass


class MonitorError(ValueError):
    pass


def validate(m):
    free = free_rec_vars(m)
    if free:
        raise MonitorError(f"free recursion variables: {', '.join(sorted(free))}")
    check_guarded(m)
    if free_data_vars(m):
        raise MonitorError(f"unbound data variables: {', '.join(sorted(free_data_vars(m)))}")
    _check(m)
    return m


def _check(m):
    if isinstance(m, Leaf):
        if m.name not in VERDICTS:
            raise MonitorError(f"unexpected leaf {m.name} in a monitor")
    elif isinstance(m, Prefix):
        if not isinstance(m.guard, SymbolicEvent):
            raise MonitorError(f"monitor prefix must be a symbolic event, got {m.guard}")
        _check(m.cont)
    elif isinstance(m, Choice):
        for i in m.items:
            _check(i)
    elif isinstance(m, Rec):
        _check(m.body)


def lvar_to_rec(name: str) -> str:
    return name.lower().replace("{", "").replace("}", "").replace(",", "_")


# synthesis

def synth_monitor(f):
    from .logic import GENERAL, classify
    if classify(f) == GENERAL:
        raise NotMonitorable(f"formula is outside the monitorable fragment: {f}")
    return drop_unused_recs(_synth(f))


def _synth(f):
    if isinstance(f, _Const):
        return YES if f.value else NO
    if isinstance(f, LVar):
        return RVar(lvar_to_rec(f.name))
    if isinstance(f, Nec):
        m = _synth(f.body)
        return YES if m == YES else Prefix(f.event, m)
    if isinstance(f, Pos):
        m = _synth(f.body)
        return NO if m == NO else Prefix(f.event, m)
    if isinstance(f, FAnd):
        ms = [_synth(i) for i in f.items]
        if NO in ms:
            return NO
        rest = [m for m in ms if m != YES]
        if not rest:
            return YES
        return rest[0] if len(rest) == 1 else Choice(rest)
    if isinstance(f, FOr):
        ms = [_synth(i) for i in f.items]
        if YES in ms:
            return YES
        rest = [m for m in ms if m != NO]
        if not rest:
            return NO
        return rest[0] if len(rest) == 1 else Choice(rest)
    if isinstance(f, (Max, Min)):
        m = _synth(f.body)
        x = lvar_to_rec(f.var)
        collapse = YES if isinstance(f, Max) else NO
        # an unguarded self reference is the trivial fixpoint
        if m == collapse or m == RVar(x):
            return collapse
        return Rec(x, m)
    raise TypeError(f"not a formula: {f!r}")


# dynamics

def verdict(m):
    if isinstance(m, Leaf) and m.name in VERDICTS:
        return m.name
    return None


def monitor_step(m, a) -> set:
    """Monitors reachable from ``m`` over event ``a``; empty when blocked."""
    if verdict(m):
        return {m}
    out = set()
    for eta, cont in transitions(m):
        sigma = match_symbolic(eta, a)
        if sigma is not None:
            out.add(subst_data(cont, sigma))
    return out


def instrumented_successors(conf) -> list:
    m, p = conf
    out = []
    for mu, p2 in transitions(p):
        if mu is TAU:
            out.append((TAU, (m, p2)))
            continue
        nxt = monitor_step(m, mu)
        if nxt:
            out.extend((mu, (m2, p2)) for m2 in sorted(nxt, key=str))
        else:
            out.append((mu, (END, p2)))
    return out


def instrumented_step(conf, mu) -> set:
    return {c for a, c in instrumented_successors(conf) if a == mu}


def monitored_lts(m, p, budget: int = DEFAULT_BUDGET) -> Lts:
    return Lts.explore((m, p), instrumented_successors, budget)


def run_monitor(m, p, trace) -> set:
    """Configurations reached after the visible trace (tau moves interleaved)."""
    def closure(confs):
        seen = set(confs)
        stack = list(confs)
        while stack:
            c = stack.pop()
            for a, c2 in instrumented_successors(c):
                if a is TAU and c2 not in seen:
                    seen.add(c2)
                    stack.append(c2)
        return seen
    cur = closure({(m, p)})
    for a in trace:
        nxt = set()
        for c in cur:
            nxt |= {c2 for b, c2 in instrumented_successors(c) if b == a}
        cur = closure(nxt)
    return cur


def _reaches(p, m, target: str, bound=None) -> bool:
    start = (m, p)
    seen = {start}
    queue = deque([(start, 0)])
    while queue:
        conf, d = queue.popleft()
        if verdict(conf[0]) == target:
            return True
        if bound is not None and d >= bound:
            continue
        for _, c2 in instrumented_successors(conf):
            if c2 not in seen:
                seen.add(c2)
                queue.append((c2, d + 1))
    return False


def accepts(p, m, bound=None) -> bool:
    return _reaches(p, m, "yes", bound)


def rejects(p, m, bound=None) -> bool:
    return _reaches(p, m, "no", bound)


def check_monitoring(m, f, corpus, bound=None) -> CheckReport:
    """Soundness and partial completeness of ``m`` for ``f`` on a corpus."""
    from .logic import satisfies
    rep = CheckReport("monitoring", corpus=f"{len(corpus)} processes")
    sound = sat_complete = viol_complete = True
    missed_sat, missed_viol = [], []
    for k, p in enumerate(corpus):
        rep.checked += 1
        sat = satisfies(p, f)
        acc = accepts(p, m, bound)
        rej = rejects(p, m, bound)
        if acc and not sat:
            sound = False
            rep.fail(property="soundness", index=k, process=p, issue="accepted but violates")
        if rej and sat:
            sound = False
            rep.fail(property="soundness", index=k, process=p, issue="rejected but satisfies")
        if sat and not acc:
            sat_complete = False
            missed_sat.append(k)
        if not sat and not rej:
            viol_complete = False
            missed_viol.append(k)
    rep.notes.update({
        "sound": sound,
        "satisfaction_complete": sat_complete,
        "violation_complete": viol_complete,
        "nmon": sound and viol_complete,
        "pmon": sound and sat_complete,
    })
    if sound and not (sat_complete or viol_complete):
        rep.fail(property="completeness", satisfying_not_accepted=missed_sat,
                 violating_not_rejected=missed_viol)
    return rep

"""Normalization of safety formulae into a deterministic normal form.

The pipeline works on systems of equations:

    standardize -> to_equations -> open_patterns -> uniformize
        -> reformulate_conditions -> determinize -> to_formula -> optimize

followed by ``close_patterns``, which folds the equalities introduced by
``open_patterns`` back into the patterns so results read naturally.
"""

from __future__ import annotations

import json
import re
from collections import deque
from dataclasses import dataclass

from .formula import (
    FF, TT, FAnd, LVar, Max, Nec, _Const, alpha_rename, conjuncts, fand,
    free_lvars, rename_free_data, subst_data, subst_lvar,
)
from .solver import condition_sat, symbolic_disjoint
from .syntax import (
    FALSE, TRUE, And, Bool, Cmp, Member, Not, Or, Pattern, Ref, SymbolicEvent,
    Tagged, Var, cond_vars, is_value, subst_cond,
)

STATE_BUDGET = 5000


class NormalizationError(ValueError):
    pass


class NotEquiDisjoint(NormalizationError):
    pass


# equation systems

@dataclass(frozen=True)
class Rhs:
    """Right-hand side: ``ff`` or a conjunction of necessities and variables."""
    ff: bool = False
    branches: tuple = ()  # of (SymbolicEvent, key)
    vars: tuple = ()      # of keys

    def refs(self) -> list:
        return [t for _, t in self.branches] + list(self.vars)


FF_RHS = Rhs(ff=True)
TT_RHS = Rhs()


def _merge(rhss) -> Rhs:
    branches, vars_ = [], []
    for r in rhss:
        if r.ff:
            return FF_RHS
        branches.extend(r.branches)
        vars_.extend(v for v in r.vars if v not in vars_)
    return Rhs(False, tuple(branches), tuple(vars_))


def key_name(k) -> str:
    return f"X{k}" if isinstance(k, int) else k


class EquationSystem:
    def __init__(self, equations: dict, principal, free=()):
        self.equations = dict(equations)
        self.principal = principal
        self.free = frozenset(free)

    def __eq__(self, other):
        return (isinstance(other, EquationSystem) and self.equations == other.equations
                and self.principal == other.principal and self.free == other.free)

    def rhs_formula(self, k):
        r = self.equations[k]
        if r.ff:
            return FF
        items = [Nec(eta, LVar(key_name(t))) for eta, t in r.branches]
        items += [LVar(key_name(v)) for v in r.vars]
        return fand(*items)

    def to_json(self) -> dict:
        return {
            "principal": key_name(self.principal),
            "free": sorted(self.free),
            "equations": [{"var": key_name(k), "formula": str(self.rhs_formula(k))}
                          for k in self.equations],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    def __str__(self):
        return "\n".join(f"{key_name(k)} = {self.rhs_formula(k)}" for k in self.equations)

    def __repr__(self):
        return f"EquationSystem(principal={key_name(self.principal)}, {len(self.equations)} equations)"

    def reachable(self) -> list:
        seen = [self.principal]
        todo = deque([self.principal])
        while todo:
            k = todo.popleft()
            for t in self.equations[k].refs():
                if t in self.equations and t not in seen:
                    seen.append(t)
                    todo.append(t)
        return seen

    def pruned(self) -> "EquationSystem":
        keep = self.reachable()
        return EquationSystem({k: self.equations[k] for k in keep}, self.principal, self.free)

    def map_events(self, fn) -> "EquationSystem":
        eqs = {}
        for k, r in self.equations.items():
            eqs[k] = Rhs(r.ff, tuple((fn(k, eta), t) for eta, t in r.branches), r.vars)
        return EquationSystem(eqs, self.principal, self.free)


# stage 1: standard form

def standardize(f):
    """Lift free unguarded variables to the top, unfolding fixpoints once."""
    psi, free = _gensf(f)
    return fand(psi, *[LVar(x) for x in free]) if free else psi


def _gensf(f):
    if isinstance(f, LVar):
        return TT, [f.name]
    if isinstance(f, Max):
        psi, free = _gensf(f.body)
        body = subst_lvar(psi, f.var, Max(f.var, psi))
        return body, [x for x in free if x != f.var]
    if isinstance(f, FAnd):
        parts, free = [], []
        for i in f.items:
            p, fr = _gensf(i)
            if p != TT:
                parts.append(p)
            free.extend(x for x in fr if x not in free)
        return fand(*parts), free
    return f, []


def is_standard_form(f) -> bool:
    """Free unguarded variables occur only in the topmost conjunction."""
    top = conjuncts(f)
    rest = [g for g in top if not isinstance(g, LVar)]
    free = free_lvars(f)
    return all(not (_unguarded(g) & free) for g in rest) and all(
        _nested_ok(g) for g in rest)


def _unguarded(f) -> set:
    if isinstance(f, LVar):
        return {f.name}
    if isinstance(f, FAnd):
        out = set()
        for i in f.items:
            out |= _unguarded(i)
        return out
    if isinstance(f, Max):
        return _unguarded(f.body) - {f.var}
    return set()


def _nested_ok(f) -> bool:
    if isinstance(f, Max):
        return f.var not in _unguarded(f.body) and _nested_ok(f.body)
    if isinstance(f, FAnd):
        return all(_nested_ok(i) for i in f.items)
    return True


# stage 2: equations

_INDEX_NAME = re.compile(r"X\d+$")


def to_equations(f) -> EquationSystem:
    """Compositional translation with breadth-first index allocation."""
    f = alpha_rename(f, taken=free_lvars(f))
    counter = [0]
    used = set(free_lvars(f))

    def new():
        counter[0] += 1
        return counter[0]

    eqs: dict = {}

    def gen(g, idx):
        """Translate ``g`` with preallocated index ``idx``; returns (principal, free)."""
        if isinstance(g, _Const):
            eqs[idx] = TT_RHS if g.value else FF_RHS
            return idx, set()
        if isinstance(g, LVar):
            eqs[idx] = Rhs(vars=(g.name,))
            return idx, {g.name}
        if isinstance(g, Nec):
            k = new()
            p, fr = gen(g.body, k)
            eqs[idx] = Rhs(branches=((g.event, p),))
            return idx, fr
        if isinstance(g, FAnd):
            kids = [new() for _ in g.items]
            res = [gen(i, k) for i, k in zip(g.items, kids)]
            eqs[idx] = _merge([eqs[p] for p, _ in res])
            return idx, set().union(*[fr for _, fr in res])
        if isinstance(g, Max):
            name = g.var
            if name in used or _INDEX_NAME.match(name):
                base = "Y" if _INDEX_NAME.match(name) else name
                name = _fresh(base, used | set(_all_lvars(g)))
                g = Max(name, subst_lvar(g.body, g.var, LVar(name)))
            used.add(name)
            p, fr = gen(g.body, idx)
            eqs[name] = eqs[p]
            return name, fr - {name}
        raise NormalizationError(f"not a safety formula: {g}")

    principal, free = gen(f, 0)
    return EquationSystem(eqs, principal, free).pruned()


def _all_lvars(f) -> list:
    out = []

    def walk(g):
        if isinstance(g, LVar):
            out.append(g.name)
        elif isinstance(g, (Max,)):
            out.append(g.var)
            walk(g.body)
        elif isinstance(g, FAnd):
            for i in g.items:
                walk(i)
        elif isinstance(g, Nec):
            walk(g.body)
    walk(f)
    return out


def _fresh(base, taken, start=1):
    n = start
    while f"{base}{n}" in taken:
        n += 1
    return f"{base}{n}"


def _data_names(sys: EquationSystem) -> set:
    out = set()
    for r in sys.equations.values():
        for eta, _ in r.branches:
            out |= eta.binders() | eta.free_vars() | cond_vars(eta.condition)
            out |= eta.pattern.refs()
    return out


# stage 3: fully open patterns

def open_patterns(sys: EquationSystem) -> EquationSystem:
    """Replace values and references in pattern slots by constrained binders."""
    taken = _data_names(sys)
    counter = [0]

    def fresh():
        counter[0] += 1
        while f"v{counter[0]}" in taken:
            counter[0] += 1
        name = f"v{counter[0]}"
        taken.add(name)
        return name

    def open_event(_, eta):
        return open_event_with(eta, fresh)

    return sys.map_events(open_event)


def open_event_with(eta: SymbolicEvent, fresh) -> SymbolicEvent:
    slots, extra = [], []
    for s in eta.pattern.slots():
        if is_value(s):
            v = fresh()
            slots.append(Var(v))
            extra.append(Cmp("=", Var(v), s))
        elif isinstance(s, Ref):
            v = fresh()
            slots.append(Var(v))
            extra.append(Cmp("=", Var(v), Var(s.name)))
        else:
            # binders stay; tagged slots holding a variable are left as they are
            slots.append(s)
    if not extra:
        return eta
    return SymbolicEvent(Pattern(eta.pattern.kind, *slots), and_(*extra, eta.condition))


def and_(*cs):
    """Flattening, duplicate-free conjunction of conditions."""
    items = []
    for c in cs:
        for i in (c.items if isinstance(c, And) else (c,)):
            if i == TRUE:
                continue
            if i == FALSE:
                return FALSE
            if i not in items:
                items.append(i)
    if not items:
        return TRUE
    return items[0] if len(items) == 1 else And(tuple(items))


# stage 4: uniform binder names

def _binder_seq(p: Pattern) -> list:
    out = []

    def walk(s):
        if isinstance(s, Var):
            out.append(s.name)
        elif isinstance(s, Tagged):
            walk(s.arg)
    for s in p.slots():
        walk(s)
    return out


def _shape(p: Pattern):
    """Pattern up to binder renaming: binders become their first position."""
    order = []

    def walk(s):
        if isinstance(s, Var):
            if s.name not in order:
                order.append(s.name)
            return ("b", order.index(s.name))
        if isinstance(s, Tagged):
            return ("t", s.tag, walk(s.arg))
        if isinstance(s, Ref):
            return ("r", s.name)
        return ("v", s)
    return (p.kind, walk(p.subject), walk(p.payload))


def uniformize(sys: EquationSystem) -> EquationSystem:
    """Breadth-first renaming so pattern-equivalent siblings share binders."""
    taken = _data_names(sys)
    counter = [0]

    def fresh():
        counter[0] += 1
        while f"z{counter[0]}" in taken:
            counter[0] += 1
        name = f"z{counter[0]}"
        taken.add(name)
        return name

    eqs = sys.equations
    env = {sys.principal: {}}
    out = {}
    layer = [sys.principal]
    while layer:
        nxt = []
        # partition the layer's necessities by pattern shape
        groups: dict = {}
        for i in layer:
            for pos, (eta, _) in enumerate(eqs[i].branches):
                groups.setdefault(_shape(eta.pattern), []).append((i, pos))
        names = {}
        for shape, members in groups.items():
            seq0 = _dedup(_binder_seq(eqs[members[0][0]].branches[members[0][1]][0].pattern))
            canon = [fresh() for _ in seq0]
            for i, pos in members:
                seq = _dedup(_binder_seq(eqs[i].branches[pos][0].pattern))
                names[(i, pos)] = dict(zip(seq, canon))
        for i in layer:
            r = eqs[i]
            branches = []
            for pos, (eta, t) in enumerate(r.branches):
                omega = {**env[i], **names[(i, pos)]}
                branches.append((eta.rename(omega), t))
                if t in eqs and t not in env:
                    env[t] = omega
                    nxt.append(t)
            for v in r.vars:
                if v in eqs and v not in env:
                    env[v] = env[i]
                    nxt.append(v)
            out[i] = Rhs(r.ff, tuple(branches), r.vars)
        layer = nxt
    ordered = {k: out[k] for k in sys.equations if k in out}
    return EquationSystem(ordered, sys.principal, sys.free)


def _dedup(seq):
    out = []
    for x in seq:
        if x not in out:
            out.append(x)
    return out


# stage 5: condition reformulation

def reformulate_conditions(sys: EquationSystem, prune: bool = True) -> EquationSystem:
    """Split same-pattern sibling conditions into their truth combinations."""
    eqs = {}
    for k, r in sys.equations.items():
        eqs[k] = Rhs(r.ff, tuple(_combine(r.branches, prune)), r.vars)
    return EquationSystem(eqs, sys.principal, sys.free)


def _combine(branches, prune):
    by_pattern: dict = {}
    for eta, _ in branches:
        conds = by_pattern.setdefault(eta.pattern, [])
        if eta.condition not in conds:
            conds.append(eta.condition)
    out = []
    for eta, t in branches:
        conds = by_pattern[eta.pattern]
        if len(conds) == 1:
            item = (eta, t)
            if item not in out:
                out.append(item)
            continue
        me = conds.index(eta.condition)
        for combo in _truth_combinations(conds, me, eta.pattern, prune):
            item = (SymbolicEvent(eta.pattern, combo), t)
            if item not in out:
                out.append(item)
    return out


def _truth_combinations(conds, me, pattern, prune):
    """Conjunctions over ``conds`` in sibling order with ``conds[me]`` kept positive."""
    results = []

    def sat(c):
        return condition_sat(c, fallback=True)

    def go(i, acc):
        if prune and not sat(and_(*acc)):
            return
        if i == len(conds):
            results.append(and_(*acc))
            return
        if i == me:
            go(i + 1, acc + [conds[i]])
            return
        go(i + 1, acc + [conds[i]])
        go(i + 1, acc + [Not(conds[i])])

    go(0, [])
    return results


# stage 6: determinization

def _free_data_fixpoint(sys: EquationSystem) -> dict:
    fd = {k: set() for k in sys.equations}
    changed = True
    while changed:
        changed = False
        for k, r in sys.equations.items():
            cur = set()
            for eta, t in r.branches:
                cur |= eta.free_vars()
                if t in fd:
                    cur |= fd[t] - eta.binders()
            for v in r.vars:
                if v in fd:
                    cur |= fd[v]
            if not cur <= fd[k]:
                fd[k] |= cur
                changed = True
    return fd


def _restrict(rho: dict, names) -> frozenset:
    return frozenset((k, v) for k, v in rho.items() if k in names and k != v)


def determinize(sys: EquationSystem, budget: int = STATE_BUDGET) -> EquationSystem:
    """Subset construction over sets of equation instances.

    A state is a set of (equation, renaming) pairs; the renaming maps data
    variables free in the equation to the names used by the state.  It is
    empty unless two pattern-equivalent guards with different binder names
    had to be merged.
    """
    eqs = sys.equations
    fd = _free_data_fixpoint(sys)
    start = frozenset({(sys.principal, frozenset())})
    names: dict = {}
    used_names: set = set()
    out: dict = {}
    free = set(sys.free)
    todo: deque = deque()

    def name_of(state):
        if state not in names:
            names[state] = _state_name(state, used_names)
            used_names.add(names[state])
            todo.append(state)
        return names[state]

    name_of(start)
    done = set()
    while todo:
        state = todo.popleft()
        if state in done:
            continue
        done.add(state)
        if len(done) > budget:
            raise NormalizationError(f"determinization exceeded {budget} states")
        me = names[state]
        # a lone variable equation is kept as is
        if len(state) == 1:
            (k, rho), = state
            r = eqs[k]
            if (not r.ff and not r.branches and len(r.vars) == 1 and r.vars[0] in eqs
                    and r.vars[0] != k and (eqs[r.vars[0]].branches or eqs[r.vars[0]].ff)):
                v = r.vars[0]
                tgt = frozenset({(v, _restrict(dict(rho), fd[v]))})
                out[me] = Rhs(vars=(name_of(tgt),))
                continue
        members, evars, is_ff = _closure(state, eqs, fd)
        free |= set(evars)
        if is_ff:
            out[me] = FF_RHS
            continue
        branches = []
        for eta, targets in _merge_branches(members, eqs, fd):
            branches.append((eta, name_of(frozenset(targets))))
        out[me] = Rhs(False, tuple(branches), tuple(evars))
    return EquationSystem(out, names[start], free)


def _closure(state, eqs, fd):
    members = []
    evars = []
    is_ff = False
    work = sorted(state, key=_member_key)
    seen = set()
    while work:
        m = work.pop(0)
        if m in seen:
            continue
        seen.add(m)
        k, rho = m
        r = eqs[k]
        if r.ff:
            is_ff = True
        members.append(m)
        for v in r.vars:
            if v in eqs:
                work.append((v, _restrict(dict(rho), fd[v])))
            elif v not in evars:
                evars.append(v)
    return members, evars, is_ff


def _member_key(m):
    k, rho = m
    return (0, k, "") if isinstance(k, int) else (1, 0, k + str(sorted(rho)))


def _merge_branches(members, eqs, fd):
    """Merged guards of a state with the instance sets they lead to."""
    inst = []
    for k, rho in sorted(members, key=_member_key):
        rho = dict(rho)
        for eta, t in eqs[k].branches:
            ev = eta.subst({a: Var(b) for a, b in rho.items()}) if rho else eta
            rt = {a: b for a, b in rho.items() if a not in eta.binders()}
            inst.append((ev, t, rt))
    # group by pattern shape; rename binders to the group's first member
    groups: dict = {}
    order = []
    for ev, t, rt in inst:
        sh = _shape(ev.pattern)
        if sh not in groups:
            groups[sh] = []
            order.append(sh)
        groups[sh].append((ev, t, rt))
    merged = []
    reps = []
    for sh in order:
        items = groups[sh]
        canon = _dedup(_binder_seq(items[0][0].pattern))
        outer = set()
        for ev, _, _ in items:
            outer |= ev.free_vars()
        if outer & set(canon):
            taken = outer | set(canon)
            canon = _distinct_fresh("w", taken, len(canon))
        renamed = []
        for ev, t, rt in items:
            seq = _dedup(_binder_seq(ev.pattern))
            m = dict(zip(seq, canon))
            ev2 = ev.rename({a: b for a, b in m.items() if a != b}) if any(a != b for a, b in m.items()) else ev
            rt2 = dict(rt)
            rt2.update(m)
            renamed.append((ev2, (t, _restrict(rt2, fd[t]))))
        pattern = renamed[0][0].pattern
        conds = []
        for ev, _ in renamed:
            if ev.condition not in conds:
                conds.append(ev.condition)
        if _conditions_disjoint(pattern, conds):
            for c in conds:
                targets = [tg for ev, tg in renamed if ev.condition == c]
                merged.append((SymbolicEvent(pattern, c), _dedup(targets)))
        else:
            for guard, idxs in _minterms(pattern, conds):
                targets = [tg for ev, tg in renamed if conds.index(ev.condition) in idxs]
                merged.append((SymbolicEvent(pattern, guard), _dedup(targets)))
        reps.append(SymbolicEvent(pattern, _or_all(conds)))
    for i in range(len(reps)):
        for j in range(i + 1, len(reps)):
            if not symbolic_disjoint(reps[i], reps[j]):
                raise NotEquiDisjoint(
                    f"guards {reps[i]} and {reps[j]} overlap without being equal")
    return merged


def _distinct_fresh(base, taken, n):
    out = []
    t = set(taken)
    for _ in range(n):
        v = _fresh(base, t)
        t.add(v)
        out.append(v)
    return out


def _or_all(conds):
    return conds[0] if len(conds) == 1 else Or(tuple(conds))


def _conditions_disjoint(pattern, conds) -> bool:
    for i in range(len(conds)):
        for j in range(i + 1, len(conds)):
            if condition_sat(and_(conds[i], conds[j]), fallback=True):
                return False
    return True


def _minterms(pattern, conds):
    """Satisfiable truth assignments (not all false) over ``conds``."""
    out = []

    def go(i, acc, pos):
        if not condition_sat(and_(*acc), fallback=True):
            return
        if i == len(conds):
            if pos:
                out.append((and_(*acc), pos))
            return
        go(i + 1, acc + [conds[i]], pos + [i])
        go(i + 1, acc + [Not(conds[i])], pos)

    go(0, [], [])
    return out


def _state_name(state, used) -> str:
    keys = sorted(state, key=_member_key)
    plain = all(not rho for _, rho in keys)
    if len(keys) == 1 and isinstance(keys[0][0], str):
        base = keys[0][0]
    else:
        parts = [str(k) for k, _ in keys]
        base = "X_{" + ",".join(parts) + "}"
    if plain and base not in used:
        return base
    n = 1
    sep = "_r" if base[-1] != "}" else "r"
    while f"{base}{sep}{n}" in used:
        n += 1
    return f"{base}{sep}{n}"


# stage 7: back to a formula

def to_formula(sys: EquationSystem, allow_free: bool = False):
    """Substitute equations into the principal until the formula is closed."""
    if sys.free and not allow_free:
        raise NormalizationError(
            f"free logical variables survive normalization: {', '.join(sorted(sys.free))}")
    eqs = sys.equations

    def build(k, bound):
        name = key_name(k)
        if name in bound:
            return LVar(name)
        r = eqs[k]
        inner = bound | {name}
        if r.ff:
            body = FF
        else:
            items = [Nec(eta, ref(t, inner)) for eta, t in r.branches]
            items += [ref(v, inner) for v in r.vars]
            body = fand(*items)
        return Max(name, body)

    def ref(t, bound):
        name = key_name(t)
        if name in bound or t not in eqs:
            return LVar(name)
        return build(t, bound)

    return build(sys.principal, frozenset())


def optimize(f):
    """Drop fixpoint binders whose variable is never used."""
    if isinstance(f, Max):
        body = optimize(f.body)
        return Max(f.var, body) if f.var in free_lvars(body) else body
    if isinstance(f, FAnd):
        return FAnd([optimize(i) for i in f.items])
    if isinstance(f, Nec):
        return Nec(f.event, optimize(f.body))
    return f


# closing patterns again

def simplify_condition(c):
    """Evaluate closed comparisons and propagate constants."""
    if isinstance(c, Cmp):
        l, r = c.lhs, c.rhs
        if is_value(l) and is_value(r):
            from .syntax import _compare
            return TRUE if _compare(c.op, l, r) else FALSE
        if isinstance(l, Var) and isinstance(r, Var) and l.name == r.name and c.op in ("=", "<=", ">=", "!="):
            if c.op == "!=":
                return FALSE
            if c.op == "=":
                return TRUE
        return c
    if isinstance(c, Member):
        if is_value(c.lhs):
            inside = any(c.lhs == w and type(c.lhs) is type(w) for w in c.values)
            return TRUE if inside != c.negated else FALSE
        return c
    if isinstance(c, And):
        return and_(*[simplify_condition(i) for i in c.items])
    if isinstance(c, Or):
        items = []
        for i in c.items:
            s = simplify_condition(i)
            if s == TRUE:
                return TRUE
            if s != FALSE and s not in items:
                items.append(s)
        if not items:
            return FALSE
        return items[0] if len(items) == 1 else Or(tuple(items))
    if isinstance(c, Not):
        s = simplify_condition(c.item)
        if isinstance(s, Bool):
            return FALSE if s.value else TRUE
        if isinstance(s, Not):
            return s.item
        if isinstance(s, Cmp) and s.op in ("=", "!="):
            return Cmp("!=" if s.op == "=" else "=", s.lhs, s.rhs)
        if isinstance(s, Member):
            return Member(s.lhs, s.values, not s.negated)
        return Not(s)
    return c


def _binders_in(f) -> set:
    out = set()
    if isinstance(f, Nec):
        out |= f.event.binders() | _binders_in(f.body)
    elif isinstance(f, FAnd):
        for i in f.items:
            out |= _binders_in(i)
    elif isinstance(f, Max):
        out |= _binders_in(f.body)
    return out


def close_patterns(f):
    """Fold ``$v = value`` and ``$v = $outer`` conjuncts back into pattern slots."""
    if isinstance(f, Max):
        return Max(f.var, close_patterns(f.body))
    if isinstance(f, FAnd):
        return FAnd([close_patterns(i) for i in f.items])
    if not isinstance(f, Nec):
        return f
    eta, body = f.event, f.body
    cond = simplify_condition(eta.condition)
    slots = list(eta.pattern.slots())
    counts = {}
    for s in slots:
        if isinstance(s, Var):
            counts[s.name] = counts.get(s.name, 0) + 1
    for idx, s in enumerate(slots):
        if not isinstance(s, Var) or counts[s.name] != 1:
            continue
        items = list(cond.items) if isinstance(cond, And) else [cond]
        hit = None
        for c in items:
            if isinstance(c, Cmp) and c.op == "=":
                other = c.rhs if c.lhs == Var(s.name) else c.lhs if c.rhs == Var(s.name) else None
                if other is None:
                    continue
                if is_value(other):
                    hit = (c, other)
                    break
                if (isinstance(other, Var) and other.name not in counts
                        and other.name not in _binders_in(body)):
                    hit = (c, other)
                    break
        if hit is None:
            continue
        c, other = hit
        items.remove(c)
        rest = and_(*items)
        if is_value(other):
            slots[idx] = other
            rest = subst_cond(rest, {s.name: other})
            body = subst_data(body, {s.name: other})
        else:
            slots[idx] = Ref(other.name)
            rest = subst_cond(rest, {s.name: Var(other.name)})
            body = rename_free_data(body, {s.name: other.name})
        cond = simplify_condition(rest)
    ev = SymbolicEvent(Pattern(eta.pattern.kind, *slots), cond)
    return Nec(ev, close_patterns(body))


# the whole pipeline

STAGES = ("sf", "eq", "open", "uni", "comb", "nf", "wf")


def pipeline(f, prune: bool = True) -> dict:
    """Every intermediate result keyed by stage name."""
    out = {}
    out["sf"] = standardize(alpha_rename(f, taken=free_lvars(f)))
    out["eq"] = to_equations(out["sf"])
    out["open"] = open_patterns(out["eq"])
    out["uni"] = uniformize(out["open"])
    out["comb"] = reformulate_conditions(out["uni"], prune=prune)
    out["nf"] = determinize(out["comb"])
    out["wf"] = close_patterns(optimize(to_formula(out["nf"])))
    return out


def normalize(f, prune: bool = True):
    from .logic import is_shml
    if not is_shml(f):
        raise NormalizationError(f"only safety formulae can be normalized: {f}")
    if free_lvars(f):
        raise NormalizationError(f"formula has free logical variables: {', '.join(sorted(free_lvars(f)))}")
    return pipeline(f, prune)["wf"]


def embed(sys: EquationSystem):
    """Formula denoted by an equation system (for stage-wise checks)."""
    return to_formula(sys, allow_free=True)


# structural predicates for stage outputs

def is_standard_system(sys: EquationSystem) -> bool:
    for k, r in sys.equations.items():
        if r.ff and (r.branches or r.vars):
            return False
        for v in r.vars:
            if v not in sys.equations and v not in sys.free:
                return False
    return sys.principal in sys.equations


def is_fully_open(sys: EquationSystem) -> bool:
    return all(all(isinstance(s, (Var, Tagged)) for s in eta.pattern.slots())
               for r in sys.equations.values() for eta, _ in r.branches)


def is_uniform(sys: EquationSystem) -> bool:
    """Pattern-equivalent siblings use identical patterns."""
    for r in sys.equations.values():
        seen = {}
        for eta, _ in r.branches:
            sh = _shape(eta.pattern)
            if sh in seen and seen[sh] != eta.pattern:
                return False
            seen[sh] = eta.pattern
    return True


def is_equi_disjoint(sys: EquationSystem) -> bool:
    for r in sys.equations.values():
        evs = _dedup([eta for eta, _ in r.branches])
        for i in range(len(evs)):
            for j in range(i + 1, len(evs)):
                if not symbolic_disjoint(evs[i], evs[j]):
                    return False
    return True


def is_normalized(sys: EquationSystem) -> bool:
    for r in sys.equations.values():
        evs = [eta for eta, _ in r.branches]
        if len(set(evs)) != len(evs):
            return False
    return is_equi_disjoint(sys)

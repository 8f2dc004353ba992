"""Satisfiability of conditions and disjointness of symbolic events.

Conditions are expanded to disjunctive normal form.  Each clause is decided
by merging equal terms with a union-find, narrowing integer intervals,
intersecting finite sets and then searching a small candidate set per
equivalence class (enough distinct values to honour every disequality).
Orderings between two variables fall outside this fragment; callers then
fall back to enumeration over a finite universe.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .syntax import (
    And, Atom, Bool, Cmp, Cond, FALSE, Member, Not, Or, Pattern, Ref,
    SymbolicEvent, Tagged, Var, cond_constants, cond_vars, conj, eval_condition,
    is_value, value_key,
)


class FragmentExceeded(Exception):
    """The clause mixes constraints the symbolic procedure does not decide."""

    def __init__(self, msg, condition=None):
        super().__init__(msg)
        self.condition = condition


DEFAULT_INT_RANGE = range(-8, 9)

# finite universe replacing the derived one in enumeration fallbacks
_universe_override = None


def set_universe(values) -> None:
    """Use ``values`` (or the derived default when None) for enumeration fallbacks."""
    global _universe_override
    _universe_override = None if values is None else list(values)


def _fallback_universe(constants):
    if _universe_override is not None:
        return _universe_override
    return default_universe(constants)

_NEG_ORDER = {"<": ">=", "<=": ">", ">": "<=", ">=": "<"}
_FLIP_ORDER = {"<": ">", "<=": ">=", ">": "<", ">=": "<="}


@dataclass(frozen=True)
class Lit:
    positive: bool
    atom: object  # Cmp with op in {=, <, <=, >, >=} or Member (non-negated)


def _lits(c: Cond, positive: bool) -> list:
    """DNF of ``c`` (or of its negation) as a list of literal lists."""
    if isinstance(c, Bool):
        return [[]] if c.value == positive else []
    if isinstance(c, Cmp):
        if c.op == "!=":
            return [[Lit(not positive, Cmp("=", c.lhs, c.rhs))]]
        return [[Lit(positive, c)]]
    if isinstance(c, Member):
        return [[Lit(positive != c.negated, Member(c.lhs, c.values))]]
    if isinstance(c, Not):
        return _lits(c.item, not positive)
    if isinstance(c, (And, Or)):
        parts = [_lits(i, positive) for i in c.items]
        if isinstance(c, And) == positive:
            out = [[]]
            for p in parts:
                out = [a + b for a in out for b in p]
                if not out:
                    return []
            return out
        return [cl for p in parts for cl in p]
    raise TypeError(f"not a condition: {c!r}")


def dnf(c: Cond) -> list:
    return _lits(c, True)


class _Class:
    __slots__ = ("const", "domain", "int_only", "atom_only", "lo", "hi", "excluded")

    def __init__(self):
        self.const = None
        self.domain = None  # finite set restriction or None
        self.int_only = False
        self.atom_only = False  # event subjects are always atoms
        self.lo = None  # bounds that apply to integer members only
        self.hi = None
        self.excluded = set()

    def admits(self, v) -> bool:
        if self.atom_only and not isinstance(v, Atom):
            return False
        if self.domain is not None and not any(_same(v, w) for w in self.domain):
            return False
        if any(_same(v, w) for w in self.excluded):
            return False
        if isinstance(v, int):
            if self.lo is not None and v < self.lo:
                return False
            if self.hi is not None and v > self.hi:
                return False
            return True
        return not self.int_only


def _same(a, b) -> bool:
    return a == b and type(a) is type(b)


class _UF:
    def __init__(self):
        self.parent = {}

    def find(self, k):
        self.parent.setdefault(k, k)
        while self.parent[k] != k:
            self.parent[k] = self.parent[self.parent[k]]
            k = self.parent[k]
        return k

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def _key(t):
    if isinstance(t, (Var, Ref)):
        return ("v", t.name)
    return ("c", t)


def _tighten(cls: _Class, op: str, c: int):
    # integer members of cls must satisfy x op c
    if op == "<":
        op, c = "<=", c - 1
    elif op == ">":
        op, c = ">=", c + 1
    if op == "<=":
        cls.hi = c if cls.hi is None else min(cls.hi, c)
    else:
        cls.lo = c if cls.lo is None else max(cls.lo, c)


def _solve_clause(lits: list, used_atoms: set, atom_vars=frozenset()):
    """Return a witness dict for the clause or None if unsatisfiable."""
    uf = _UF()
    var_names = set()
    for lit in lits:
        a = lit.atom
        for t in ((a.lhs, a.rhs) if isinstance(a, Cmp) else (a.lhs,)):
            if isinstance(t, (Var, Ref)):
                var_names.add(t.name)
                uf.find(_key(t))
    for lit in lits:
        a = lit.atom
        if lit.positive and isinstance(a, Cmp) and a.op == "=":
            if is_value(a.lhs) and is_value(a.rhs):
                if not _same(a.lhs, a.rhs):
                    return None
                continue
            uf.union(_key(a.lhs), _key(a.rhs))
    classes: dict = {}

    def cls_of(t) -> _Class:
        r = uf.find(_key(t))
        if r not in classes:
            classes[r] = _Class()
        return classes[r]

    for name in var_names:
        cls_of(Var(name)).atom_only |= name in atom_vars
    # constants sitting in a class
    for k in list(uf.parent):
        if k[0] == "c":
            cl = cls_of(k[1])
            if cl.const is not None and not _same(cl.const, k[1]):
                return None
            cl.const = k[1]
    diseq = []
    for lit in lits:
        a = lit.atom
        if isinstance(a, Member):
            if is_value(a.lhs):
                inside = any(_same(a.lhs, w) for w in a.values)
                if inside != lit.positive:
                    return None
                continue
            cl = cls_of(a.lhs)
            if lit.positive:
                dom = set(a.values)
                cl.domain = dom if cl.domain is None else {v for v in cl.domain if any(_same(v, w) for w in dom)}
            else:
                cl.excluded |= set(a.values)
            continue
        lhs, rhs, op = a.lhs, a.rhs, a.op
        if op == "=":
            if lit.positive:
                continue
            if is_value(lhs) and is_value(rhs):
                if _same(lhs, rhs):
                    return None
                continue
            if is_value(lhs):
                lhs, rhs = rhs, lhs
            if is_value(rhs):
                cls_of(lhs).excluded.add(rhs)
            else:
                ra, rb = uf.find(_key(lhs)), uf.find(_key(rhs))
                if ra == rb:
                    return None
                diseq.append((ra, rb))
            continue
        # orderings
        if is_value(lhs) and is_value(rhs):
            from .syntax import _compare
            if _compare(op, lhs, rhs) != lit.positive:
                return None
            continue
        if is_value(lhs):
            lhs, rhs, op = rhs, lhs, _FLIP_ORDER[op]
        if not is_value(rhs):
            raise FragmentExceeded("ordering between two variables", a)
        cl = cls_of(lhs)
        if not isinstance(rhs, int):
            if lit.positive:
                return None  # ordering against a non-integer never holds
            continue
        if lit.positive:
            cl.int_only = True
            _tighten(cl, op, rhs)
        else:
            _tighten(cl, _NEG_ORDER[op], rhs)

    roots = list(classes)
    need = len(roots) + 1
    fresh_pool = _fresh_atoms(used_atoms, need)
    cands = {}
    for r in roots:
        cl = classes[r]
        if cl.const is not None:
            opts = [cl.const] if cl.admits(cl.const) else []
        elif cl.domain is not None:
            opts = sorted((v for v in cl.domain if cl.admits(v)), key=value_key)
        else:
            opts = [] if cl.atom_only else _int_candidates(cl, need)
            if not cl.int_only:
                opts += [a for a in fresh_pool if cl.admits(a)][:need]
        if not opts:
            return None
        cands[r] = opts
    neighbours = {r: set() for r in roots}
    for a, b in diseq:
        neighbours[a].add(b)
        neighbours[b].add(a)
    order = sorted(roots, key=lambda r: len(cands[r]))
    assign: dict = {}

    def search(i) -> bool:
        if i == len(order):
            return True
        r = order[i]
        for v in cands[r]:
            if any(n in assign and _same(assign[n], v) for n in neighbours[r]):
                continue
            assign[r] = v
            if search(i + 1):
                return True
            del assign[r]
        return False

    if not search(0):
        return None
    return {name: assign[uf.find(("v", name))] for name in var_names}


def _int_candidates(cl: _Class, need: int) -> list:
    lo, hi = cl.lo, cl.hi
    if lo is not None and hi is not None and lo > hi:
        return []
    start = lo if lo is not None else (hi if hi is not None else 0)
    out = []
    # walk outwards from a point inside the interval
    step = 0
    budget = need + len(cl.excluded) + 2
    while len(out) < budget and step < 4 * budget + 8:
        for v in ((start + step,) if step == 0 else (start + step, start - step)):
            if (lo is None or v >= lo) and (hi is None or v <= hi) and cl.admits(v):
                out.append(v)
        step += 1
    return out


def _fresh_atoms(used: set, n: int) -> list:
    out, k = [], 0
    names = {a.name for a in used if isinstance(a, Atom)}
    while len(out) < n:
        k += 1
        nm = "k" if k == 1 else f"k{k}"
        if nm not in names:
            out.append(Atom(nm))
    return out


def solve(c: Cond, atom_vars=frozenset()) -> dict | None:
    """Witness assignment for ``c`` or None; raises FragmentExceeded.

    Variables in ``atom_vars`` may only take atom values.
    """
    used = {v for v in cond_constants(c) if isinstance(v, Atom)}
    names = cond_vars(c)
    for clause in dnf(c):
        w = _solve_clause(clause, used, atom_vars)
        if w is not None:
            # variables dropped by the DNF are unconstrained
            full = {n: w.get(n, Atom("k")) for n in names}
            if eval_condition(c, full):
                return full
            # a variable missing from this clause may matter elsewhere; search on
            full = _complete(c, w, names, used, atom_vars)
            if full is not None:
                return full
    return None


def _complete(c, partial, names, used, atom_vars=frozenset()):
    missing = sorted(names - set(partial))
    pool = default_universe(cond_constants(c)) + _fresh_atoms(used, 2)
    pools = [[v for v in pool if isinstance(v, Atom)] if n in atom_vars else pool for n in missing]
    for combo in itertools.product(*pools):
        full = dict(partial)
        full.update(zip(missing, combo))
        if eval_condition(c, full):
            return full
    return None


def default_universe(constants, int_range=DEFAULT_INT_RANGE, fresh: int = 1) -> list:
    """Atoms and tagged values mentioned, integers in range, plus fresh atoms."""
    out = set(int_range)
    tags = set()
    for v in constants:
        out.add(v)
        if isinstance(v, Tagged):
            tags.add(v.tag)
    atoms = {v for v in constants if isinstance(v, Atom)}
    out |= set(_fresh_atoms(atoms, fresh))
    for t in tags:
        for b in list(atoms) + [0, 1, 2, 3]:
            out.add(Tagged(t, b))
    return sorted(out, key=value_key)


def enumerate_sat(c: Cond, universe) -> dict | None:
    names = sorted(cond_vars(c))
    for combo in itertools.product(list(universe), repeat=len(names)):
        sigma = dict(zip(names, combo))
        if eval_condition(c, sigma):
            return sigma
    return None


def condition_sat(c: Cond, outer=frozenset(), fallback: bool = False, universe=None) -> bool:
    """Decide satisfiability; outer variables behave as unknown constants.

    With ``fallback`` the enumeration oracle is used when the symbolic
    procedure gives up, otherwise FragmentExceeded propagates.
    """
    try:
        return solve(c) is not None
    except FragmentExceeded:
        if not fallback:
            raise
        uni = universe if universe is not None else _fallback_universe(cond_constants(c))
        return enumerate_sat(c, uni) is not None


def sat_witness(c: Cond, universe=None) -> dict | None:
    try:
        return solve(c)
    except FragmentExceeded:
        uni = universe if universe is not None else _fallback_universe(cond_constants(c))
        return enumerate_sat(c, uni)


# disjointness

SUBJECT_SLOTS = frozenset({"_s"})


def open_constraints(p: Pattern, slot_names=("_s", "_p"), rename=None) -> Cond:
    """Equalities tying the slot variables of ``p`` to its contents."""
    rename = rename or {}
    parts = []
    for sv, slot in zip(slot_names, p.slots()):
        parts.append(_slot_eq(Var(sv), slot, rename))
    return conj(*parts)


def _slot_eq(sv, slot, rename):
    if isinstance(slot, Var):
        return Cmp("=", sv, Var(rename.get(slot.name, slot.name)))
    if isinstance(slot, Ref):
        return Cmp("=", sv, Var(slot.name))
    if isinstance(slot, Tagged) and not is_value(slot):
        raise FragmentExceeded("tagged pattern slot holding a variable")
    return Cmp("=", sv, slot)


def joint_condition(e1: SymbolicEvent, e2: SymbolicEvent) -> Cond | None:
    """Condition under which one event matches both, None if kinds differ."""
    if e1.pattern.kind != e2.pattern.kind:
        return None
    r1 = {n: f"_a_{n}" for n in e1.binders()}
    r2 = {n: f"_b_{n}" for n in e2.binders()}
    c1 = e1.rename({k: Var(v) for k, v in r1.items()}).condition
    c2 = e2.rename({k: Var(v) for k, v in r2.items()}).condition
    return conj(open_constraints(e1.pattern, rename=r1), open_constraints(e2.pattern, rename=r2), c1, c2)


def _event_universe(e1, e2):
    from .syntax import event_constants
    return _fallback_universe(event_constants(e1) | event_constants(e2))


def symbolic_disjoint(e1: SymbolicEvent, e2: SymbolicEvent, fallback: bool = True, universe=None) -> bool:
    """True iff no concrete event matches both symbolic events."""
    try:
        c = joint_condition(e1, e2)
        if c is None:
            return True
        return solve(c, atom_vars=SUBJECT_SLOTS) is None
    except FragmentExceeded:
        if not fallback:
            raise
        return disjoint_by_enumeration(e1, e2, universe or _event_universe(e1, e2))


def disjoint_by_enumeration(e1: SymbolicEvent, e2: SymbolicEvent, universe) -> bool:
    """Oracle: look for a concrete event in the universe matching both.

    Free (outer) variables are enumerated over the universe as well.
    """
    from .syntax import events_over, match_symbolic
    if e1.pattern.kind != e2.pattern.kind:
        return True
    outer = sorted(e1.free_vars() | e2.free_vars())
    uni = list(universe)
    for combo in itertools.product(uni, repeat=len(outer)):
        sigma = dict(zip(outer, combo))
        a, b = e1.subst(sigma), e2.subst(sigma)
        for ev in events_over([a.pattern.kind], uni):
            if match_symbolic(a, ev) is not None and match_symbolic(b, ev) is not None:
                return False
    return True


def pairwise_disjoint(events, fallback: bool = True) -> bool:
    evs = list(events)
    for i in range(len(evs)):
        for j in range(i + 1, len(evs)):
            if not symbolic_disjoint(evs[i], evs[j], fallback=fallback):
                return False
    return True


def negate(c: Cond) -> Cond:
    if c == FALSE:
        from .syntax import TRUE
        return TRUE
    return Not(c)

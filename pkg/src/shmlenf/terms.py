"""Prefix/choice/recursion terms shared by processes, monitors and enforcers.

The three languages only differ in what labels a prefix (a concrete action,
a symbolic event or a symbolic transformation) and in their leaves, so one
small AST serves all of them.  Guards that bind data variables scope over the
continuation; recursion variables live in a separate namespace.
"""

from __future__ import annotations

from .syntax import (
    TAU, Event, SymbolicEvent, SymbolicTransformation, Var, cond_vars,
)


class UnguardedError(ValueError):
    pass


class _Term:
    __slots__ = ("_h",)

    def __hash__(self):
        try:
            return self._h
        except AttributeError:
            h = hash((type(self).__name__,) + self._key())
            object.__setattr__(self, "_h", h)
            return h

    def __eq__(self, other):
        if self is other:
            return True
        return type(self) is type(other) and hash(self) == hash(other) and self._key() == other._key()

    def __setattr__(self, k, v):
        raise AttributeError("terms are immutable")

    def __repr__(self):
        return f"{type(self).__name__}({', '.join(map(repr, self._key()))})"

    def __str__(self):
        return show(self)


class Leaf(_Term):
    """nil for processes, yes/no/end for monitors, id for enforcers."""
    __slots__ = ("name",)

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)

    def _key(self):
        return (self.name,)


class Prefix(_Term):
    __slots__ = ("guard", "cont")

    def __init__(self, guard, cont):
        object.__setattr__(self, "guard", guard)
        object.__setattr__(self, "cont", cont)

    def _key(self):
        return (self.guard, self.cont)


class Choice(_Term):
    __slots__ = ("items",)

    def __init__(self, items):
        object.__setattr__(self, "items", tuple(items))

    def _key(self):
        return self.items


class Rec(_Term):
    __slots__ = ("var", "body")

    def __init__(self, var: str, body):
        object.__setattr__(self, "var", var)
        object.__setattr__(self, "body", body)

    def _key(self):
        return (self.var, self.body)


class RVar(_Term):
    __slots__ = ("name",)

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)

    def _key(self):
        return (self.name,)


NIL = Leaf("nil")


def choice(*items):
    flat = []
    for t in items:
        flat.extend(t.items if isinstance(t, Choice) else [t])
    if len(flat) == 1:
        return flat[0]
    return Choice(flat)


# guards

def guard_binders(g) -> set:
    if isinstance(g, SymbolicEvent):
        return g.binders()
    if isinstance(g, SymbolicTransformation):
        return g.source.binders()
    return set()


def guard_free(g) -> set:
    if isinstance(g, SymbolicEvent):
        return g.free_vars()
    if isinstance(g, SymbolicTransformation):
        out = g.source.free_vars()
        if g.replacement is not TAU:
            out |= g.replacement.refs() - g.source.binders()
        return out
    return set()


def guard_subst(g, sigma):
    if isinstance(g, (SymbolicEvent, SymbolicTransformation)):
        return g.subst(sigma)
    return g


def guard_rename(g, mapping):
    """Rename data variables of a guard, binders included."""
    if isinstance(g, SymbolicEvent):
        return g.rename(mapping)
    if isinstance(g, SymbolicTransformation):
        from .syntax import subst_pattern
        rep = g.replacement
        if rep is not TAU:
            ren = {k: Var(v) for k, v in mapping.items()}
            rep = subst_pattern(rep, ren, binders_too=True)
        return SymbolicTransformation(g.source.rename(mapping), rep)
    return g


# substitution

def subst_data(t, sigma: dict):
    """Push a data substitution into a term; guard binders shadow it."""
    if not sigma:
        return t
    if isinstance(t, Prefix):
        inner = {k: v for k, v in sigma.items() if k not in guard_binders(t.guard)}
        return Prefix(guard_subst(t.guard, sigma), subst_data(t.cont, inner))
    if isinstance(t, Choice):
        return Choice([subst_data(i, sigma) for i in t.items])
    if isinstance(t, Rec):
        return Rec(t.var, subst_data(t.body, sigma))
    return t


def subst_rec(t, name: str, repl):
    if isinstance(t, RVar):
        return repl if t.name == name else t
    if isinstance(t, Prefix):
        return Prefix(t.guard, subst_rec(t.cont, name, repl))
    if isinstance(t, Choice):
        return Choice([subst_rec(i, name, repl) for i in t.items])
    if isinstance(t, Rec):
        if t.var == name:
            return t
        return Rec(t.var, subst_rec(t.body, name, repl))
    return t


def unfold(t: Rec):
    return subst_rec(t.body, t.var, t)


def transitions(t) -> list:
    """Outgoing (guard, continuation) pairs after unfolding top-level recursion."""
    out = []
    _transitions(t, out, 0)
    return out


def _transitions(t, out, depth):
    if depth > 10000:
        raise UnguardedError("unguarded recursion")
    if isinstance(t, Prefix):
        out.append((t.guard, t.cont))
    elif isinstance(t, Choice):
        for i in t.items:
            _transitions(i, out, depth)
    elif isinstance(t, Rec):
        _transitions(unfold(t), out, depth + 1)


def free_rec_vars(t) -> set:
    if isinstance(t, RVar):
        return {t.name}
    if isinstance(t, Prefix):
        return free_rec_vars(t.cont)
    if isinstance(t, Choice):
        out = set()
        for i in t.items:
            out |= free_rec_vars(i)
        return out
    if isinstance(t, Rec):
        return free_rec_vars(t.body) - {t.var}
    return set()


def free_data_vars(t) -> set:
    if isinstance(t, Prefix):
        return guard_free(t.guard) | (free_data_vars(t.cont) - guard_binders(t.guard))
    if isinstance(t, Choice):
        out = set()
        for i in t.items:
            out |= free_data_vars(i)
        return out
    if isinstance(t, Rec):
        return free_data_vars(t.body)
    return set()


def check_guarded(t, unguarded=frozenset()):
    """Raise UnguardedError if a recursion variable occurs unguarded."""
    if isinstance(t, RVar):
        if t.name in unguarded:
            raise UnguardedError(f"recursion variable {t.name} is unguarded")
    elif isinstance(t, Prefix):
        check_guarded(t.cont, frozenset())
    elif isinstance(t, Choice):
        for i in t.items:
            check_guarded(i, unguarded)
    elif isinstance(t, Rec):
        check_guarded(t.body, unguarded | {t.var})


def rec_referenced(t, name) -> bool:
    return name in free_rec_vars(t)


def drop_unused_recs(t):
    """Remove ``rec x`` binders whose variable never occurs in the body."""
    if isinstance(t, Prefix):
        return Prefix(t.guard, drop_unused_recs(t.cont))
    if isinstance(t, Choice):
        return Choice([drop_unused_recs(i) for i in t.items])
    if isinstance(t, Rec):
        body = drop_unused_recs(t.body)
        return Rec(t.var, body) if rec_referenced(body, t.var) else body
    return t


def size(t) -> int:
    if isinstance(t, Prefix):
        return 1 + size(t.cont)
    if isinstance(t, Choice):
        return 1 + sum(size(i) for i in t.items)
    if isinstance(t, Rec):
        return 1 + size(t.body)
    return 1


# alpha equivalence

def alpha_equal(a, b) -> bool:
    return _alpha(a, b, {}, {}, {}, {}, 0)


def _alpha(a, b, ra, rb, da, db, n) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, Leaf):
        return a.name == b.name
    if isinstance(a, RVar):
        return ra.get(a.name, ("free", a.name)) == rb.get(b.name, ("free", b.name))
    if isinstance(a, Rec):
        k = object()
        return _alpha(a.body, b.body, {**ra, a.var: k}, {**rb, b.var: k}, da, db, n)
    if isinstance(a, Choice):
        return len(a.items) == len(b.items) and all(
            _alpha(x, y, ra, rb, da, db, n) for x, y in zip(a.items, b.items))
    if isinstance(a, Prefix):
        ba, bb = sorted(guard_binders(a.guard)), sorted(guard_binders(b.guard))
        if len(ba) != len(bb):
            return False
        # canonical names for the guard's binders, then compare structurally
        ma = {**da}
        mb = {**db}
        ga = _canon_guard(a.guard, da, n)
        gb = _canon_guard(b.guard, db, n)
        if ga is None or gb is None or ga != gb:
            return False
        for v in ba:
            ma[v] = _canon_binder_name(a.guard, v, n)
        for v in bb:
            mb[v] = _canon_binder_name(b.guard, v, n)
        return _alpha(a.cont, b.cont, ra, rb, ma, mb, n + 1)
    return a == b


def _binder_order(g) -> list:
    from .syntax import Tagged
    pat = g.pattern if isinstance(g, SymbolicEvent) else g.source.pattern
    seen = []
    for s in pat.slots():
        if isinstance(s, Tagged):
            s = s.arg
        if isinstance(s, Var) and s.name not in seen:
            seen.append(s.name)
    return seen


def _canon_binder_name(g, v, n):
    return f"_{n}_{_binder_order(g).index(v)}"


def _canon_guard(g, scope, n):
    if not isinstance(g, (SymbolicEvent, SymbolicTransformation)):
        return g
    mapping = {k: v for k, v in scope.items()}
    for i, v in enumerate(_binder_order(g)):
        mapping[v] = f"_{n}_{i}"
    # free variables outside any scope keep their name
    return guard_rename(g, mapping)


# printing

_GUARD_KINDS = (SymbolicEvent, SymbolicTransformation)


def show_guard(g) -> str:
    if isinstance(g, SymbolicEvent):
        return f"[{g}]"
    if isinstance(g, SymbolicTransformation):
        return f"[{g}]"
    return str(g)


def show(t) -> str:
    """Canonical text; binders shadowing an enclosing binder are renamed."""
    return _show(t, frozenset(), False)


def _ends_open(t) -> bool:
    # a trailing rec would swallow whatever follows it
    if isinstance(t, Rec):
        return True
    if isinstance(t, Prefix):
        return not isinstance(t.cont, Choice) and _ends_open(t.cont)
    return False


def _fresh_name(base, taken):
    k = 1
    while f"{base}{k}" in taken:
        k += 1
    return f"{base}{k}"


def _show(t, scope, in_choice):
    if isinstance(t, Leaf):
        return t.name
    if isinstance(t, RVar):
        return t.name
    if isinstance(t, Rec):
        b = _show(t.body, scope, False)
        if isinstance(t.body, Choice):
            b = f"({b})"
        s = f"rec {t.var}.{b}"
        return f"({s})" if in_choice else s
    if isinstance(t, Choice):
        parts = []
        for k, i in enumerate(t.items):
            parts.append(_show(i, scope, True))
        return " + ".join(parts)
    if isinstance(t, Prefix):
        g, cont = t.guard, t.cont
        binders = guard_binders(g)
        clash = binders & scope
        if clash:
            taken = set(scope) | binders | free_data_vars(cont)
            mapping = {}
            for v in sorted(clash):
                nv = _fresh_name(v, taken)
                taken.add(nv)
                mapping[v] = nv
            g = guard_rename_binders(g, mapping)
            cont = rename_refs(cont, mapping)
            binders = guard_binders(g)
        inner = scope | binders
        c = _show(cont, inner, False)
        if isinstance(cont, Choice):
            c = f"({c})"
        s = f"{show_guard(g)}.{c}"
        return f"({s})" if in_choice and _ends_open(t) else s
    return str(t)


def guard_rename_binders(g, mapping):
    """Rename only the guard's own binders (and their uses inside the guard)."""
    return guard_rename(g, {k: v for k, v in mapping.items() if k in guard_binders(g)})


def rename_refs(t, mapping: dict):
    """Rename free data-variable references in a term."""
    if not mapping:
        return t
    if isinstance(t, Prefix):
        b = guard_binders(t.guard)
        outer = {k: v for k, v in mapping.items() if k not in b}
        g = t.guard
        if isinstance(g, _GUARD_KINDS) and outer:
            g = _rename_free(g, outer)
        return Prefix(g, rename_refs(t.cont, outer))
    if isinstance(t, Choice):
        return Choice([rename_refs(i, mapping) for i in t.items])
    if isinstance(t, Rec):
        return Rec(t.var, rename_refs(t.body, mapping))
    return t


def _rename_free(g, mapping):
    # guard.subst treats a Var target as a renaming of refs and free vars
    return g.subst({k: Var(v) for k, v in mapping.items()})

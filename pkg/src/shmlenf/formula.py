"""Formula syntax: the AST, substitutions and the canonical printer."""

from __future__ import annotations

from .syntax import SymbolicEvent, Var
from .terms import _Term, _fresh_name


class Formula(_Term):
    __slots__ = ()


class _Const(Formula):
    __slots__ = ("value",)

    def __init__(self, value: bool):
        object.__setattr__(self, "value", value)

    def _key(self):
        return (self.value,)


TT = _Const(True)
FF = _Const(False)


class LVar(Formula):
    __slots__ = ("name",)

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)

    def _key(self):
        return (self.name,)


class FAnd(Formula):
    __slots__ = ("items",)

    def __init__(self, items):
        object.__setattr__(self, "items", tuple(items))

    def _key(self):
        return self.items


class FOr(Formula):
    __slots__ = ("items",)

    def __init__(self, items):
        object.__setattr__(self, "items", tuple(items))

    def _key(self):
        return self.items


class Nec(Formula):
    __slots__ = ("event", "body")

    def __init__(self, event: SymbolicEvent, body):
        object.__setattr__(self, "event", event)
        object.__setattr__(self, "body", body)

    def _key(self):
        return (self.event, self.body)


class Pos(Formula):
    __slots__ = ("event", "body")

    def __init__(self, event: SymbolicEvent, body):
        object.__setattr__(self, "event", event)
        object.__setattr__(self, "body", body)

    def _key(self):
        return (self.event, self.body)


class Max(Formula):
    __slots__ = ("var", "body")

    def __init__(self, var: str, body):
        object.__setattr__(self, "var", var)
        object.__setattr__(self, "body", body)

    def _key(self):
        return (self.var, self.body)


class Min(Formula):
    __slots__ = ("var", "body")

    def __init__(self, var: str, body):
        object.__setattr__(self, "var", var)
        object.__setattr__(self, "body", body)

    def _key(self):
        return (self.var, self.body)


Modal = (Nec, Pos)
Fix = (Max, Min)


def fand(*items):
    """Flattening conjunction; a single operand is returned as is."""
    flat = []
    for f in items:
        flat.extend(f.items if isinstance(f, FAnd) else [f])
    if not flat:
        return TT
    return flat[0] if len(flat) == 1 else FAnd(flat)


def conjuncts(f) -> list:
    return list(f.items) if isinstance(f, FAnd) else [f]


# traversal helpers

def free_lvars(f) -> set:
    if isinstance(f, LVar):
        return {f.name}
    if isinstance(f, (FAnd, FOr)):
        out = set()
        for i in f.items:
            out |= free_lvars(i)
        return out
    if isinstance(f, Modal):
        return free_lvars(f.body)
    if isinstance(f, Fix):
        return free_lvars(f.body) - {f.var}
    return set()


def free_data(f) -> set:
    if isinstance(f, (FAnd, FOr)):
        out = set()
        for i in f.items:
            out |= free_data(i)
        return out
    if isinstance(f, Modal):
        return f.event.free_vars() | (free_data(f.body) - f.event.binders())
    if isinstance(f, Fix):
        return free_data(f.body)
    return set()


def subst_lvar(f, name: str, repl):
    """Replace free occurrences of logical variable ``name``.

    Replacements are closed over data in every use we make of this, so no
    capture of data variables can happen.
    """
    if isinstance(f, LVar):
        return repl if f.name == name else f
    if isinstance(f, FAnd):
        return FAnd([subst_lvar(i, name, repl) for i in f.items])
    if isinstance(f, FOr):
        return FOr([subst_lvar(i, name, repl) for i in f.items])
    if isinstance(f, Nec):
        return Nec(f.event, subst_lvar(f.body, name, repl))
    if isinstance(f, Pos):
        return Pos(f.event, subst_lvar(f.body, name, repl))
    if isinstance(f, Fix):
        if f.var == name:
            return f
        return type(f)(f.var, subst_lvar(f.body, name, repl))
    return f


def unfold(f):
    return subst_lvar(f.body, f.var, f)


def subst_data(f, sigma: dict):
    """Push a data substitution in; modal binders shadow it."""
    if not sigma:
        return f
    if isinstance(f, FAnd):
        return FAnd([subst_data(i, sigma) for i in f.items])
    if isinstance(f, FOr):
        return FOr([subst_data(i, sigma) for i in f.items])
    if isinstance(f, Modal):
        inner = {k: v for k, v in sigma.items() if k not in f.event.binders()}
        return type(f)(f.event.subst(sigma), subst_data(f.body, inner))
    if isinstance(f, Fix):
        return type(f)(f.var, subst_data(f.body, sigma))
    return f


def rename_data(f, mapping: dict):
    """Rename data variables everywhere (binders, references, conditions)."""
    if not mapping:
        return f
    if isinstance(f, FAnd):
        return FAnd([rename_data(i, mapping) for i in f.items])
    if isinstance(f, FOr):
        return FOr([rename_data(i, mapping) for i in f.items])
    if isinstance(f, Modal):
        return type(f)(f.event.rename(mapping), rename_data(f.body, mapping))
    if isinstance(f, Fix):
        return type(f)(f.var, rename_data(f.body, mapping))
    return f


def rename_free_data(f, mapping: dict):
    """Rename only free data variables, respecting shadowing."""
    if not mapping:
        return f
    if isinstance(f, FAnd):
        return FAnd([rename_free_data(i, mapping) for i in f.items])
    if isinstance(f, FOr):
        return FOr([rename_free_data(i, mapping) for i in f.items])
    if isinstance(f, Modal):
        b = f.event.binders()
        ev = f.event.subst({k: Var(v) for k, v in mapping.items()})
        inner = {k: v for k, v in mapping.items() if k not in b}
        return type(f)(ev, rename_free_data(f.body, inner))
    if isinstance(f, Fix):
        return type(f)(f.var, rename_free_data(f.body, mapping))
    return f


def lvars_bound(f) -> list:
    out = []

    def walk(g):
        if isinstance(g, Fix):
            out.append(g.var)
            walk(g.body)
        elif isinstance(g, (FAnd, FOr)):
            for i in g.items:
                walk(i)
        elif isinstance(g, Modal):
            walk(g.body)
    walk(f)
    return out


def alpha_rename(f, taken=None):
    """Give every fixpoint a distinct variable name (X, X1, X2, ...)."""
    taken = set(free_lvars(f)) if taken is None else set(taken)

    def walk(g, env):
        if isinstance(g, LVar):
            return LVar(env.get(g.name, g.name))
        if isinstance(g, FAnd):
            return FAnd([walk(i, env) for i in g.items])
        if isinstance(g, FOr):
            return FOr([walk(i, env) for i in g.items])
        if isinstance(g, Modal):
            return type(g)(g.event, walk(g.body, env))
        if isinstance(g, Fix):
            v = g.var
            if v in taken:
                base = v.rstrip("0123456789") or "X"
                v = _fresh_name(base, taken)
            taken.add(v)
            return type(g)(v, walk(g.body, {**env, g.var: v}))
        return g
    return walk(f, {})


def fsize(f) -> int:
    if isinstance(f, (FAnd, FOr)):
        return 1 + sum(fsize(i) for i in f.items)
    if isinstance(f, (Modal + Fix)):
        return 1 + fsize(f.body)
    return 1


def events_of(f) -> list:
    out = []

    def walk(g):
        if isinstance(g, Modal):
            out.append(g.event)
            walk(g.body)
        elif isinstance(g, (FAnd, FOr)):
            for i in g.items:
                walk(i)
        elif isinstance(g, Fix):
            walk(g.body)
    walk(f)
    return out


# alpha equivalence over both logical and data binders

def alpha_equal(a, b) -> bool:
    return _canon(a, {}, {}, [0]) == _canon(b, {}, {}, [0])


def _canon(f, lenv, denv, counter):
    if isinstance(f, LVar):
        return ("v", lenv.get(f.name, ("free", f.name)))
    if isinstance(f, _Const):
        return ("c", f.value)
    if isinstance(f, (FAnd, FOr)):
        return (type(f).__name__,) + tuple(_canon(i, lenv, denv, counter) for i in f.items)
    if isinstance(f, Fix):
        counter[0] += 1
        k = counter[0]
        return (type(f).__name__, k, _canon(f.body, {**lenv, f.var: k}, denv, counter))
    if isinstance(f, Modal):
        counter[0] += 1
        k = counter[0]
        order = []
        from .syntax import Tagged
        for s in f.event.pattern.slots():
            s = s.arg if isinstance(s, Tagged) else s
            if isinstance(s, Var) and s.name not in order:
                order.append(s.name)
        inner = dict(denv)
        for i, v in enumerate(order):
            inner[v] = f"_{k}_{i}"
        ren = {kk: vv for kk, vv in denv.items() if kk not in order}
        ren.update({v: inner[v] for v in order})
        ev = f.event.rename(ren)
        return (type(f).__name__, ev, _canon(f.body, lenv, inner, counter))
    raise TypeError(f)


# printing

def show(f) -> str:
    return _show(f, frozenset())


def _ends_open(f) -> bool:
    if isinstance(f, Fix):
        return True
    if isinstance(f, Modal):
        return not isinstance(f.body, (FAnd, FOr)) and _ends_open(f.body)
    return False


def _show(f, scope) -> str:
    if f is TT or (isinstance(f, _Const) and f.value):
        return "tt"
    if isinstance(f, _Const):
        return "ff"
    if isinstance(f, LVar):
        return f.name
    if isinstance(f, FAnd):
        parts = []
        for i in f.items:
            s = _show(i, scope)
            if isinstance(i, (FAnd, FOr)) or _ends_open(i):
                s = f"({s})"
            parts.append(s)
        return " & ".join(parts)
    if isinstance(f, FOr):
        parts = []
        for i in f.items:
            s = _show(i, scope)
            if isinstance(i, FOr) or _ends_open(i):
                s = f"({s})"
            parts.append(s)
        return " | ".join(parts)
    if isinstance(f, Fix):
        kw = "max" if isinstance(f, Max) else "min"
        b = _show(f.body, scope)
        if isinstance(f.body, (FAnd, FOr)):
            b = f"({b})"
        return f"{kw} {f.var}.{b}"
    if isinstance(f, Modal):
        ev, body = f.event, f.body
        clash = ev.binders() & scope
        if clash:
            taken = set(scope) | ev.binders() | free_data(body)
            mapping = {}
            for v in sorted(clash):
                nv = _fresh_name(v, taken)
                taken.add(nv)
                mapping[v] = nv
            ev = ev.rename(mapping)
            body = rename_free_data(body, mapping)
        s = _show(body, scope | ev.binders())
        if isinstance(body, (FAnd, FOr)):
            s = f"({s})"
        l, r = ("[", "]") if isinstance(f, Nec) else ("<", ">")
        return f"{l}{ev}{r}{s}"
    raise TypeError(f)


Formula.__str__ = lambda self: show(self)

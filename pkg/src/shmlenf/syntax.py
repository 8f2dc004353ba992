"""Values, events, patterns, conditions and symbolic events.

Pattern slots hold a concrete value, a binder (``Var``) or a reference to a
variable bound further out (``Ref``).  Both print as ``$name``; the parser
decides which one a slot is by looking at the enclosing binders.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union


class OpenTermError(Exception):
    """Raised when a term still mentions an unbound data variable."""


# values

@dataclass(frozen=True)
class Atom:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Tagged:
    tag: str
    arg: object  # a value, or a Var/Ref when used inside a pattern

    def __str__(self):
        return f"{self.tag}({show_slot(self.arg)})"


Value = Union[Atom, int, Tagged]


@dataclass(frozen=True)
class Var:
    """A data variable; a binder when it sits in a pattern slot."""
    name: str

    def __str__(self):
        return "$" + self.name


@dataclass(frozen=True)
class Ref:
    """A pattern slot referring to a variable bound by an enclosing pattern."""
    name: str

    def __str__(self):
        return "$" + self.name


def is_value(x) -> bool:
    if isinstance(x, bool):
        return False
    if isinstance(x, (Atom, int)):
        return True
    return isinstance(x, Tagged) and is_value(x.arg)


def value_sort(v) -> int:
    if isinstance(v, int):
        return 0
    if isinstance(v, Atom):
        return 1
    return 2


def value_key(v):
    """Total order used for printing sets and for deterministic iteration."""
    if isinstance(v, int):
        return (0, v, "")
    if isinstance(v, Atom):
        return (1, 0, v.name)
    if isinstance(v, Tagged):
        return (2, 0, v.tag + "(" + repr(value_key(v.arg)) + ")")
    return (3, 0, str(v))


def show_slot(x) -> str:
    return str(x)


# events

@dataclass(frozen=True)
class Event:
    kind: str  # "?" input, "!" output
    subject: Value
    payload: Value

    def __str__(self):
        return f"{self.subject}{self.kind}({show_slot(self.payload)})"


class _Tau:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "TAU"

    def __str__(self):
        return "tau"

    def __reduce__(self):
        return (_Tau, ())


TAU = _Tau()


def is_tau(a) -> bool:
    return a is TAU


# patterns

@dataclass(frozen=True)
class Pattern:
    kind: str
    subject: object
    payload: object

    def __str__(self):
        return f"{show_slot(self.subject)}{self.kind}({show_slot(self.payload)})"

    def slots(self):
        return (self.subject, self.payload)

    def binders(self) -> set:
        out = set()
        for s in self.slots():
            _collect(s, Var, out)
        return out

    def refs(self) -> set:
        out = set()
        for s in self.slots():
            _collect(s, Ref, out)
        return out

    def is_fully_open(self) -> bool:
        return all(isinstance(s, (Var, Ref)) for s in self.slots())

    def is_fully_closed(self) -> bool:
        return all(is_value(s) for s in self.slots())


def _collect(slot, cls, out):
    if isinstance(slot, cls):
        out.add(slot.name)
    elif isinstance(slot, Tagged):
        _collect(slot.arg, cls, out)


def subst_slot(slot, sigma: dict, binders_too: bool = False):
    """Replace references (and optionally binders) named in ``sigma``."""
    if isinstance(slot, Ref) or (binders_too and isinstance(slot, Var)):
        if slot.name in sigma:
            t = sigma[slot.name]
            if isinstance(t, Var) and isinstance(slot, Ref):
                return Ref(t.name)
            return t
        return slot
    if isinstance(slot, Tagged):
        return Tagged(slot.tag, subst_slot(slot.arg, sigma, binders_too))
    return slot


def subst_pattern(p: Pattern, sigma: dict, binders_too: bool = False) -> Pattern:
    return Pattern(p.kind, subst_slot(p.subject, sigma, binders_too),
                   subst_slot(p.payload, sigma, binders_too))


def pattern_as_event(p: Pattern) -> Event:
    if not p.is_fully_closed():
        raise OpenTermError(f"pattern {p} is not closed")
    return Event(p.kind, p.subject, p.payload)


# conditions

class Cond:
    __slots__ = ()


@dataclass(frozen=True)
class Bool(Cond):
    value: bool

    def __str__(self):
        return "tt" if self.value else "ff"


TRUE = Bool(True)
FALSE = Bool(False)

ORDER_OPS = ("<", "<=", ">", ">=")
CMP_OPS = ("=", "!=") + ORDER_OPS


@dataclass(frozen=True)
class Cmp(Cond):
    op: str
    lhs: object
    rhs: object

    def __str__(self):
        return f"{show_slot(self.lhs)} {self.op} {show_slot(self.rhs)}"


@dataclass(frozen=True)
class Member(Cond):
    lhs: object
    values: frozenset
    negated: bool = False

    def __str__(self):
        body = ", ".join(str(v) for v in sorted(self.values, key=value_key))
        kw = "not in" if self.negated else "in"
        return f"{show_slot(self.lhs)} {kw} {{{body}}}"


@dataclass(frozen=True)
class And(Cond):
    items: tuple

    def __str__(self):
        return " && ".join(_paren(c, 2) for c in self.items)


@dataclass(frozen=True)
class Or(Cond):
    items: tuple

    def __str__(self):
        return " || ".join(_paren(c, 1) for c in self.items)


@dataclass(frozen=True)
class Not(Cond):
    item: Cond

    def __str__(self):
        return "!" + _paren(self.item, 3)


def _prec(c) -> int:
    if isinstance(c, Or):
        return 1
    if isinstance(c, And):
        return 2
    if isinstance(c, (Cmp, Member)):
        return 2.5
    return 4


def _paren(c, level) -> str:
    s = str(c)
    return f"({s})" if _prec(c) <= level else s


def conj(*cs) -> Cond:
    """Flattening conjunction that drops ``tt`` operands."""
    items = []
    for c in cs:
        if c == TRUE:
            continue
        if c == FALSE:
            return FALSE
        if isinstance(c, And):
            items.extend(c.items)
        else:
            items.append(c)
    if not items:
        return TRUE
    if len(items) == 1:
        return items[0]
    return And(tuple(items))


def disj(*cs) -> Cond:
    items = []
    for c in cs:
        if c == FALSE:
            continue
        if c == TRUE:
            return TRUE
        if isinstance(c, Or):
            items.extend(c.items)
        else:
            items.append(c)
    if not items:
        return FALSE
    if len(items) == 1:
        return items[0]
    return Or(tuple(items))


def cond_vars(c: Cond) -> set:
    out = set()
    _cond_vars(c, out)
    return out


def _cond_vars(c, out):
    if isinstance(c, Cmp):
        for t in (c.lhs, c.rhs):
            if isinstance(t, (Var, Ref)):
                out.add(t.name)
    elif isinstance(c, Member):
        if isinstance(c.lhs, (Var, Ref)):
            out.add(c.lhs.name)
    elif isinstance(c, (And, Or)):
        for i in c.items:
            _cond_vars(i, out)
    elif isinstance(c, Not):
        _cond_vars(c.item, out)


def cond_constants(c: Cond) -> set:
    out = set()
    if isinstance(c, Cmp):
        out.update(t for t in (c.lhs, c.rhs) if is_value(t))
    elif isinstance(c, Member):
        out.update(c.values)
        if is_value(c.lhs):
            out.add(c.lhs)
    elif isinstance(c, (And, Or)):
        for i in c.items:
            out |= cond_constants(i)
    elif isinstance(c, Not):
        out |= cond_constants(c.item)
    return out


def _subst_term(t, sigma):
    if isinstance(t, (Var, Ref)) and t.name in sigma:
        r = sigma[t.name]
        return Var(r.name) if isinstance(r, (Var, Ref)) else r
    return t


def subst_cond(c: Cond, sigma: dict) -> Cond:
    if not sigma:
        return c
    if isinstance(c, Cmp):
        return Cmp(c.op, _subst_term(c.lhs, sigma), _subst_term(c.rhs, sigma))
    if isinstance(c, Member):
        return Member(_subst_term(c.lhs, sigma), c.values, c.negated)
    if isinstance(c, And):
        return And(tuple(subst_cond(i, sigma) for i in c.items))
    if isinstance(c, Or):
        return Or(tuple(subst_cond(i, sigma) for i in c.items))
    if isinstance(c, Not):
        return Not(subst_cond(c.item, sigma))
    return c


def _compare(op, a, b) -> bool:
    if op == "=":
        return a == b and type(a) is type(b)
    if op == "!=":
        return not (a == b and type(a) is type(b))
    # ordering only makes sense between integers
    if not (isinstance(a, int) and isinstance(b, int)):
        return False
    return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]


def _resolve(t, sigma):
    if isinstance(t, (Var, Ref)):
        if t.name not in sigma:
            raise OpenTermError(f"unbound variable ${t.name}")
        return sigma[t.name]
    return t


def eval_condition(c: Cond, sigma: dict) -> bool:
    """Evaluate a condition under a substitution that closes it."""
    if isinstance(c, Bool):
        return c.value
    if isinstance(c, Cmp):
        return _compare(c.op, _resolve(c.lhs, sigma), _resolve(c.rhs, sigma))
    if isinstance(c, Member):
        v = _resolve(c.lhs, sigma)
        inside = any(v == w and type(v) is type(w) for w in c.values)
        return inside != c.negated
    if isinstance(c, And):
        return all(eval_condition(i, sigma) for i in c.items)
    if isinstance(c, Or):
        return any(eval_condition(i, sigma) for i in c.items)
    if isinstance(c, Not):
        return not eval_condition(c.item, sigma)
    raise TypeError(f"not a condition: {c!r}")


# matching

def _match_slot(slot, v, sigma) -> bool:
    if isinstance(slot, Var):
        if slot.name in sigma:
            w = sigma[slot.name]
            return w == v and type(w) is type(v)
        sigma[slot.name] = v
        return True
    if isinstance(slot, Ref):
        raise OpenTermError(f"pattern refers to unbound ${slot.name}")
    if isinstance(slot, Tagged):
        return isinstance(v, Tagged) and v.tag == slot.tag and _match_slot(slot.arg, v.arg, sigma)
    return slot == v and type(slot) is type(v)


def match_pattern(p: Pattern, a) -> dict | None:
    """Return the substitution making ``p`` equal to event ``a``, or None."""
    if not isinstance(a, Event) or p.kind != a.kind:
        return None
    sigma: dict = {}
    if _match_slot(p.subject, a.subject, sigma) and _match_slot(p.payload, a.payload, sigma):
        return sigma
    return None


@dataclass(frozen=True)
class SymbolicEvent:
    pattern: Pattern
    condition: Cond = TRUE

    def __str__(self):
        if self.condition == TRUE:
            return str(self.pattern)
        return f"{self.pattern} when {self.condition}"

    def binders(self) -> set:
        return self.pattern.binders()

    def free_vars(self) -> set:
        """Data variables this event needs from its context."""
        return self.pattern.refs() | (cond_vars(self.condition) - self.pattern.binders())

    def subst(self, sigma: dict) -> "SymbolicEvent":
        """Push an outer substitution in; the event's own binders shadow it."""
        if not sigma:
            return self
        inner = {k: v for k, v in sigma.items() if k not in self.pattern.binders()}
        return SymbolicEvent(subst_pattern(self.pattern, sigma), subst_cond(self.condition, inner))

    def rename(self, mapping: dict) -> "SymbolicEvent":
        """Rename binders, references and condition variables alike."""
        ren = {k: Var(v) if isinstance(v, str) else v for k, v in mapping.items()}
        return SymbolicEvent(subst_pattern(self.pattern, ren, binders_too=True),
                             subst_cond(self.condition, ren))


def match_symbolic(eta: SymbolicEvent, a) -> dict | None:
    sigma = match_pattern(eta.pattern, a)
    if sigma is None:
        return None
    return sigma if eval_condition(eta.condition, sigma) else None


@dataclass(frozen=True)
class SymbolicTransformation:
    source: SymbolicEvent
    replacement: object  # Pattern or TAU

    def __str__(self):
        rep = "tau" if self.replacement is TAU else str(self.replacement)
        if self.source.condition == TRUE:
            return f"{self.source.pattern} -> {rep}"
        return f"{self.source} -> {rep}"

    def is_suppression(self) -> bool:
        return self.replacement is TAU

    def subst(self, sigma: dict) -> "SymbolicTransformation":
        if not sigma:
            return self
        src = self.source.subst(sigma)
        if self.replacement is TAU:
            return SymbolicTransformation(src, TAU)
        inner = {k: v for k, v in sigma.items() if k not in self.source.binders()}
        return SymbolicTransformation(src, subst_pattern(self.replacement, inner))

    def well_formed(self) -> bool:
        if self.replacement is TAU:
            return True
        names = self.replacement.binders() | self.replacement.refs()
        return names <= self.source.binders() | self.source.free_vars()


def apply_transformation(t: SymbolicTransformation, a):
    """Return (output action, substitution) or None when ``a`` does not match."""
    sigma = match_symbolic(t.source, a)
    if sigma is None:
        return None
    if t.replacement is TAU:
        return TAU, sigma
    out = subst_pattern(t.replacement, sigma, binders_too=True)
    return pattern_as_event(out), sigma


def pattern_equivalent(p1: Pattern, p2: Pattern) -> dict | None:
    """Bijective renaming ``rho`` of p2's variables with p2 rho == p1, or None."""
    if p1.kind != p2.kind:
        return None
    fwd: dict = {}
    back: dict = {}

    def walk(a, b) -> bool:
        if type(a) is not type(b):
            return False
        if isinstance(a, (Var, Ref)):
            if fwd.get(b.name, a.name) != a.name or back.get(a.name, b.name) != b.name:
                return False
            fwd[b.name] = a.name
            back[a.name] = b.name
            return True
        if isinstance(a, Tagged):
            return a.tag == b.tag and walk(a.arg, b.arg)
        return a == b

    if walk(p1.subject, p2.subject) and walk(p1.payload, p2.payload):
        return fwd
    return None


def events_over(kind_set: Iterable[str], universe: Iterable) -> list:
    """All concrete events with atom subjects drawn from ``universe``."""
    vals = sorted(set(universe), key=value_key)
    subjects = [v for v in vals if isinstance(v, Atom)]
    return [Event(k, s, v) for k in kind_set for s in subjects for v in vals]


def is_singleton(eta: SymbolicEvent, universe: Iterable) -> bool:
    hits = 0
    for ev in events_over([eta.pattern.kind], universe):
        if match_symbolic(eta, ev) is not None:
            hits += 1
            if hits > 1:
                return False
    return hits == 1


def event_constants(eta: SymbolicEvent) -> set:
    out = set(cond_constants(eta.condition))
    for s in eta.pattern.slots():
        if is_value(s):
            out.add(s)
    return out

"""Recursive-descent parsers for events, conditions, formulae, processes,
monitors and enforcers.

Identifiers starting with a lower-case letter are atoms (or recursion
variables in term position), upper-case identifiers are logical variables
and ``$name`` is a data variable.  Inside a pattern a ``$name`` that an
enclosing pattern already binds is read as a reference, otherwise it binds.
"""

from __future__ import annotations

import re

from . import formula as F
from .syntax import (
    FALSE, TAU, TRUE, And, Atom, Cmp, Event, Member, Not, Or, Pattern, Ref,
    SymbolicEvent, SymbolicTransformation, Tagged, Var, is_value,
)
from .terms import NIL, Choice, Leaf, Prefix, Rec, RVar


class ParseError(ValueError):
    def __init__(self, msg, text="", pos=0):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line = line
        self.column = col


_TOKEN = re.compile(r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<int>-?\d+)
  | (?P<var>\$[A-Za-z_][A-Za-z0-9_]*)
  | (?P<lvar>[A-Z][A-Za-z0-9_]*(?:\{[A-Za-z0-9_,\s]*\}[A-Za-z0-9_]*)?)
  | (?P<ident>[a-z_][A-Za-z0-9_]*)
  | (?P<op>->|&&|\|\||!=|<=|>=|[?!.+&|()\[\]<>{},=])
""", re.VERBOSE)


def tokenize(text: str) -> list:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    # token helpers
    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, value, k=0) -> bool:
        t = self.peek(k)
        return t[0] in ("op", "ident") and t[1] == value

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value):
        t = self.peek()
        if not self.at(value):
            self.fail(f"expected {value!r}, found {t[1] or 'end of input'!r}")
        return self.take()

    def fail(self, msg):
        raise ParseError(msg, self.text, self.peek()[2])

    def done(self):
        if self.peek()[0] != "eof":
            self.fail(f"unexpected {self.peek()[1]!r}")

    # values and patterns
    def value(self):
        kind, text, _ = self.peek()
        if kind == "int":
            self.take()
            return int(text)
        if kind == "ident":
            self.take()
            if self.at("("):
                self.take()
                arg = self.value()
                self.expect(")")
                return Tagged(text, arg)
            return Atom(text)
        self.fail(f"expected a value, found {text!r}")

    def slot(self, scope, binding=True):
        kind, text, _ = self.peek()
        if kind == "var":
            self.take()
            name = text[1:]
            if name in scope or not binding:
                return Ref(name)
            return Var(name)
        if kind == "ident" and self.at("(", 1):
            self.take()
            self.take()
            arg = self.slot(scope, binding)
            self.expect(")")
            return Tagged(text, arg)
        return self.value()

    def payload(self, scope, binding=True):
        if self.at("("):
            self.take()
            s = self.slot(scope, binding)
            self.expect(")")
            return s
        return self.slot(scope, binding)

    def pattern(self, scope, binding=True) -> Pattern:
        subj = self.slot(scope, binding)
        if not (self.at("?") or self.at("!")):
            self.fail("expected '?' or '!'")
        kind = self.take()[1]
        pay = self.payload(scope, binding)
        if isinstance(subj, Var) and isinstance(pay, Var) and subj.name == pay.name:
            pass
        return Pattern(kind, subj, pay)

    def event(self) -> Event:
        p = self.pattern(frozenset(), binding=False)
        if not p.is_fully_closed():
            self.fail("concrete event expected")
        return Event(p.kind, p.subject, p.payload)

    # conditions
    def condition(self):
        items = [self.cond_and()]
        while self.at("||"):
            self.take()
            items.append(self.cond_and())
        return items[0] if len(items) == 1 else Or(tuple(items))

    def cond_and(self):
        items = [self.cond_unary()]
        while self.at("&&"):
            self.take()
            items.append(self.cond_unary())
        return items[0] if len(items) == 1 else And(tuple(items))

    def cond_unary(self):
        if self.at("!"):
            self.take()
            return Not(self.cond_unary())
        if self.at("("):
            self.take()
            c = self.condition()
            self.expect(")")
            return c
        if self.at("tt") or self.at("true"):
            self.take()
            return TRUE
        if self.at("ff") or self.at("false"):
            self.take()
            return FALSE
        lhs = self.cond_term()
        if self.at("in") or (self.at("not") and self.at("in", 1)):
            neg = self.take()[1] == "not"
            if neg:
                self.take()
            self.expect("{")
            vals = []
            if not self.at("}"):
                vals.append(self.value())
                while self.at(","):
                    self.take()
                    vals.append(self.value())
            self.expect("}")
            return Member(lhs, frozenset(vals), neg)
        t = self.peek()
        if t[0] == "op" and t[1] in ("=", "!=", "<", "<=", ">", ">="):
            self.take()
            rhs = self.cond_term()
            return Cmp(t[1], lhs, rhs)
        self.fail("expected a comparison")

    def cond_term(self):
        if self.peek()[0] == "var":
            return Var(self.take()[1][1:])
        return self.value()

    def symbolic_event(self, scope, closer) -> SymbolicEvent:
        p = self.pattern(scope)
        cond = TRUE
        if self.at("when"):
            self.take()
            cond = self.condition()
        return SymbolicEvent(p, cond)

    def bracket(self, scope, allow_transform=False):
        """``[pat when c]`` or ``[pat when c -> pat']``; returns guard, new scope."""
        self.expect("[")
        eta = self.symbolic_event(scope, "]")
        inner = scope | eta.binders()
        guard = eta
        if self.at("->"):
            if not allow_transform:
                self.fail("transformation not allowed here")
            self.take()
            if self.at("tau"):
                self.take()
                rep = TAU
            else:
                rep = self.pattern(inner, binding=False)
            guard = SymbolicTransformation(eta, rep)
        elif allow_transform == "required":
            self.fail("expected '->'")
        self.expect("]")
        return guard, inner

    # formulae
    def formula(self, scope=frozenset()):
        items = [self.f_and(scope)]
        while self.at("|") or self.at("||"):
            self.take()
            items.append(self.f_and(scope))
        return items[0] if len(items) == 1 else F.FOr(items)

    def f_and(self, scope):
        items = [self.f_unary(scope)]
        while self.at("&") or self.at("&&"):
            self.take()
            items.append(self.f_unary(scope))
        return items[0] if len(items) == 1 else F.FAnd(items)

    def f_unary(self, scope):
        kind, text, _ = self.peek()
        if self.at("tt") or self.at("true"):
            self.take()
            return F.TT
        if self.at("ff") or self.at("false"):
            self.take()
            return F.FF
        if kind == "lvar":
            self.take()
            return F.LVar(text)
        if self.at("max") or self.at("min"):
            self.take()
            t = self.take()
            if t[0] != "lvar":
                self.i -= 1
                self.fail("expected a logical variable (upper case)")
            self.expect(".")
            body = self.formula(scope)
            return (F.Max if text == "max" else F.Min)(t[1], body)
        if self.at("("):
            self.take()
            f = self.formula(scope)
            self.expect(")")
            return f
        if self.at("["):
            eta, inner = self.bracket(scope)
            return F.Nec(eta, self.f_unary(inner))
        if self.at("<"):
            self.take()
            eta = self.symbolic_event(scope, ">")
            self.expect(">")
            return F.Pos(eta, self.f_unary(scope | eta.binders()))
        self.fail(f"unexpected {text or 'end of input'!r} in formula")

    # prefix/choice/rec terms
    def term(self, leaves, prefix, scope=frozenset()):
        items = [self.t_unary(leaves, prefix, scope)]
        while self.at("+"):
            self.take()
            items.append(self.t_unary(leaves, prefix, scope))
        return items[0] if len(items) == 1 else Choice(items)

    def t_unary(self, leaves, prefix, scope):
        kind, text, _ = self.peek()
        if self.at("("):
            self.take()
            t = self.term(leaves, prefix, scope)
            self.expect(")")
            return t
        if self.at("rec"):
            self.take()
            v = self.take()
            if v[0] != "ident":
                self.i -= 1
                self.fail("expected a recursion variable")
            self.expect(".")
            return Rec(v[1], self.term(leaves, prefix, scope))
        if kind == "ident" and text in leaves and not (self.at("?", 1) or self.at("!", 1)):
            self.take()
            return Leaf(text)
        guard, inner = prefix(self, scope)
        if guard is None:
            if kind == "ident":
                self.take()
                return RVar(text)
            self.fail(f"unexpected {text or 'end of input'!r}")
        self.expect(".")
        return Prefix(guard, self.t_unary(leaves, prefix, inner))


def _process_prefix(p: _Parser, scope):
    if p.at("tau"):
        p.take()
        return TAU, scope
    kind, text, _ = p.peek()
    if kind in ("ident", "int") and (p.at("?", 1) or p.at("!", 1)):
        return p.event(), scope
    return None, scope


def _monitor_prefix(p: _Parser, scope):
    if p.at("["):
        return p.bracket(scope)
    return None, scope


def _enforcer_prefix(p: _Parser, scope):
    if p.at("["):
        return p.bracket(scope, allow_transform="required")
    return None, scope


def _whole(text, fn):
    p = _Parser(text)
    out = fn(p)
    p.done()
    return out


def parse_value(text):
    return _whole(text, lambda p: p.value())


def parse_event(text) -> Event:
    return _whole(text, lambda p: p.event())


def parse_action(text):
    if text.strip() == "tau":
        return TAU
    return parse_event(text)


def parse_trace(text) -> list:
    text = text.strip()
    if not text:
        return []
    return [parse_action(part) for part in _split_top(text)]


def _split_top(text):
    parts, depth, cur = [], 0, ""
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch in ",;" and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    parts.append(cur)
    return [s.strip() for s in parts if s.strip()]


def parse_pattern(text, scope=frozenset()) -> Pattern:
    return _whole(text, lambda p: p.pattern(frozenset(scope)))


def parse_condition(text):
    return _whole(text, lambda p: p.condition())


def parse_symbolic_event(text, scope=frozenset()) -> SymbolicEvent:
    text = text.strip()
    if text.startswith("["):
        return _whole(text, lambda p: p.bracket(frozenset(scope))[0])
    return _whole(text, lambda p: p.symbolic_event(frozenset(scope), None))


def parse_transformation(text, scope=frozenset()) -> SymbolicTransformation:
    text = text.strip()
    if not text.startswith("["):
        text = f"[{text}]"
    return _whole(text, lambda p: p.bracket(frozenset(scope), allow_transform="required")[0])


def parse_formula(text) -> F.Formula:
    return _whole(text, lambda p: p.formula())


def parse_process(text):
    from .process import validate
    t = _whole(text, lambda p: p.term({"nil"}, _process_prefix))
    return validate(t)


def parse_monitor(text):
    from .detection import validate
    t = _whole(text, lambda p: p.term({"yes", "no", "end"}, _monitor_prefix))
    return validate(t)


def parse_enforcer(text):
    from .enforcement import validate
    t = _whole(text, lambda p: p.term({"id"}, _enforcer_prefix))
    return validate(t)


def parse_universe(text) -> list:
    text = text.strip().strip("{}")
    return [parse_value(v) for v in _split_top(text)]

"""Concrete syntax: parsing, printing and error positions."""

import pytest

from shmlenf import catalog
from shmlenf.formula import alpha_equal as f_alpha
from shmlenf.parser import (
    ParseError, parse_enforcer, parse_formula, parse_monitor, parse_process, parse_trace,
)
from shmlenf.syntax import TAU, Ref, Var


@pytest.mark.parametrize("table,parse", [
    (catalog.PROCESSES, parse_process),
    (catalog.FORMULAE, parse_formula),
    (catalog.MONITORS, parse_monitor),
    (catalog.ENFORCERS, parse_enforcer),
])
def test_print_parse_round_trip(table, parse):
    for text in table.values():
        t = parse(text)
        assert parse(str(t)) == t


def test_bare_payloads_are_accepted():
    assert parse_process("i?req.i!ans.nil") == parse_process("i?(req).i!(ans).nil")


def test_inner_dollar_is_a_reference():
    f = parse_formula("[$x?(req)][$x!(ans)]ff")
    inner = f.body.event.pattern
    assert isinstance(inner.subject, Ref)
    assert isinstance(f.event.pattern.subject, Var)


def test_trace_with_tau():
    tr = parse_trace("i?(req), tau, i!(ans)")
    assert tr[1] is TAU and len(tr) == 3


def test_error_reports_line_and_column():
    with pytest.raises(ParseError) as exc:
        parse_formula("max X.\n[i?(req")
    assert exc.value.line == 2 and exc.value.column > 1


def test_max_body_extends_right():
    a = parse_formula("max X.[i?(req)]X & [i!(ans)]ff")
    b = parse_formula("max X.([i?(req)]X & [i!(ans)]ff)")
    assert a == b


def test_subscripted_logical_variables():
    f = parse_formula("max X_{3,11}.[i?(req)]X_{3,11}")
    assert f_alpha(f, parse_formula("max Y.[i?(req)]Y"))


@pytest.mark.parametrize("text", ["rec x.y", "rec x.x", "[i?(req)].id"])
def test_enforcer_validation(text):
    with pytest.raises(ValueError):
        parse_enforcer(text)


def test_enforcer_needs_transformation():
    with pytest.raises(ValueError):
        parse_enforcer("rec x.[i?(req)].x")


def test_monitor_rejects_enforcer_leaf():
    with pytest.raises(ValueError):
        parse_monitor("id")

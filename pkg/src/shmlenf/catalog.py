"""Named reference terms used by tests, the corpus generator and the CLI."""

from __future__ import annotations

from .parser import parse_enforcer, parse_formula, parse_monitor, parse_process

PROCESSES = {
    "p1": "rec x.(i?(req).i!(ans).x + i?(cls).nil)",
    "q1": "rec x.(i?(req).i!(ans).x + i?(req).x + i?(cls).nil)",
    "r1": "rec x.(i?(req).i!(ans).(i?(req).i!(ans).x + i?(cls).nil) + i?(cls).nil)",
    # the close branch sits after the internal step, as in the drawn LTS
    "s1": "rec x.tau.(i?(req).i!(ans).x + i?(cls).nil)",
    "t_req_req": "i?(req).i?(req).nil",
}

FORMULAE = {
    "phi0": "max X.[i?(req)]([i!(ans)]X & [i?(req)]ff)",
    "phi1": "max X.[$x?(req) when $x != j]([$x!(ans)]X & [$x?(req)]ff)",
    "phi2": "max X.([i?(req)][i!(ans)]X & [i?(req)][i?(req)]ff)",
    "phi3": "max X.([$x?(req) when $x != h][$x!(ans)]X & [$x?(req) when $x != j][$x?(req)]ff)",
    # the unfolded request/answer property that phi2 normalizes to
    "phi2_nf": "[i?(req)](([i!(ans)] max X.[i?(req)]([i!(ans)]X & [i?(req)]ff)) & [i?(req)]ff)",
}

MONITORS = {
    "m1": "rec x.[$x?(req) when $x != j].([$x!(ans)].x + [$x?(req)].no)",
}

ENFORCERS = {
    "e1": "rec x.([$x?(req) when $x != j -> tau].x + [$y!(ans) -> $y!(ans)].x)",
    "e2": "rec x.[$x?(req) when $x != j -> $x?(req)].rec y.([$x!(ans) -> $x!(ans)].x + [$x?(req) -> tau].y)",
    "e3": "rec x.([i?(req) -> i?(req)].[i!(ans) -> i!(ans)].x + [i?(req) -> i?(req)].[i?(req) -> tau].x)",
    "e0": "rec x.[i?(req) -> i?(req)].rec y.([i!(ans) -> i!(ans)].x + [i?(req) -> tau].y)",
}


def process(name):
    return parse_process(PROCESSES[name])


def formula(name):
    return parse_formula(FORMULAE[name])


def monitor(name):
    return parse_monitor(MONITORS[name])


def enforcer(name):
    return parse_enforcer(ENFORCERS[name])


def lookup(name):
    """Parse a catalog entry by name from whichever table holds it."""
    for table, fn in ((PROCESSES, parse_process), (FORMULAE, parse_formula),
                      (MONITORS, parse_monitor), (ENFORCERS, parse_enforcer)):
        if name in table:
            return fn(table[name])
    raise KeyError(name)

"""Command-line front end.

Exit codes: 0 success or passing check, 1 failing check, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys

from . import detection, enforcement, logic, normalize as norm, verify
from .lts import StateBudgetExceeded
from .parser import (
    ParseError, parse_action, parse_enforcer, parse_formula, parse_monitor, parse_process,
    parse_trace, parse_universe,
)
from .process import reachable_lts, strong_bisim, weak_bisim
from .solver import FragmentExceeded, set_universe
from .syntax import is_tau


class UsageError(Exception):
    pass


def _text(arg: str) -> str:
    """Inline text, or the contents of a file when ``arg`` names one."""
    if arg is None:
        raise UsageError("missing input")
    if os.path.isfile(arg):
        with open(arg, encoding="utf-8") as fh:
            return fh.read().strip()
    return arg


def _emit(args, text: str, data=None):
    if args.format == "json":
        print(json.dumps(data if data is not None else {"result": text}, sort_keys=True, indent=2))
    else:
        print(text)


def _trace_str(actions) -> str:
    return ",".join(str(a) for a in actions)


def _formula(arg):
    return parse_formula(_text(arg))


# subcommands

KINDS = {
    "formula": parse_formula,
    "process": parse_process,
    "enforcer": parse_enforcer,
    "monitor": parse_monitor,
}


def cmd_parse(args) -> int:
    text = _text(args.input)
    kinds = [args.kind] if args.kind != "auto" else ["formula", "process", "enforcer", "monitor"]
    first_error = None
    for kind in kinds:
        try:
            term = KINDS[kind](text)
        except (ParseError, ValueError) as exc:
            first_error = first_error or exc
            continue
        tag = logic.classify(term) if kind == "formula" else kind
        _emit(args, f"{term} : {tag}", {"kind": kind, "term": str(term), "class": tag})
        return 0
    raise first_error


def cmd_normalize(args) -> int:
    f = _formula(args.input)
    if args.stage == "wf":
        out = norm.normalize(f)
        _emit(args, str(out), {"stage": "wf", "formula": str(out)})
        return 0
    stages = norm.pipeline(f)
    out = stages[args.stage]
    if isinstance(out, norm.EquationSystem):
        _emit(args, str(out), {"stage": args.stage, **out.to_json()})
    else:
        _emit(args, str(out), {"stage": args.stage, "formula": str(out)})
    return 0


def cmd_synth_monitor(args) -> int:
    m = detection.synth_monitor(_formula(args.input))
    _emit(args, str(m), {"monitor": str(m)})
    return 0


def cmd_synth_enforcer(args) -> int:
    e = enforcement.synth_enforcer(_formula(args.input), normalize_first=True)
    _emit(args, str(e), {"enforcer": str(e), "well_formed": enforcement.is_well_formed(e)})
    return 0


def cmd_eval(args) -> int:
    f = _formula(args.input)
    lts = reachable_lts(parse_process(_text(args.process)))
    states = sorted(logic.denot(f, lts, weak=not args.strong_modalities))
    labels = [str(lts.labels[s]) for s in states]
    holds = lts.init in states
    text = "\n".join(labels) + f"\ninitial state satisfies: {str(holds).lower()}"
    _emit(args, text.lstrip("\n"), {"states": labels, "initial": holds, "total": len(lts)})
    return 0


def cmd_sat(args) -> int:
    f = _formula(args.input)
    w = logic.bounded_sat(f, args.bound)
    if w is None:
        _emit(args, f"no model with at most {args.bound} states (unknown)", {"witness": None})
        return 1
    _emit(args, str(w), {"witness": str(w)})
    return 0


def cmd_simulate(args) -> int:
    if bool(args.enforcer) == bool(args.monitor):
        raise UsageError("give exactly one of --enforcer or --monitor")
    proc = parse_process(_text(args.process)) if args.process else None
    trace = parse_trace(args.trace) if args.trace is not None else None
    if args.enforcer:
        e = parse_enforcer(_text(args.enforcer))
        if proc is None:
            if trace is None:
                raise UsageError("simulate needs --trace or --process")
            runs = enforcement.run_enforcer(e, trace)
            outs = sorted({o for o, _ in runs}, key=_trace_str)
            shown = [enforcement.observable(o) if args.observable else list(o) for o in outs]
            _emit(args, "\n".join(_trace_str(o) for o in shown),
                  {"outputs": [_trace_str(o) for o in shown],
                   "final": sorted(str(x) for _, x in runs)})
            return 0
        if trace is None:
            lts = enforcement.enforced_lts(e, proc)
            return _dump_lts(args, lts)
        outs = sorted(enforcement.simulate_process(e, proc, trace), key=_trace_str)
        shown = [enforcement.observable(o) if args.observable else list(o) for o in outs]
        _emit(args, "\n".join(_trace_str(o) for o in shown), {"outputs": [_trace_str(o) for o in shown]})
        return 0
    m = parse_monitor(_text(args.monitor))
    if proc is None:
        if trace is None:
            raise UsageError("simulate needs --trace or --process")
        cur = {m}
        for a in trace:
            nxt = set()
            for x in cur:
                step = detection.monitor_step(x, a)
                nxt |= step if step else {detection.END}
            cur = nxt
        res = sorted(str(x) for x in cur)
        _emit(args, "\n".join(res), {"monitors": res})
        return 0
    if trace is None:
        return _dump_lts(args, detection.monitored_lts(m, proc))
    confs = detection.run_monitor(m, proc, trace)
    verdicts = sorted({detection.verdict(x) or "undecided" for x, _ in confs})
    _emit(args, "\n".join(verdicts), {"verdicts": verdicts})
    return 0


def _dump_lts(args, lts) -> int:
    lines = [f"{s} {a} {t}" for s, a, t in lts.edges()]
    labels = [f"{k}: {_conf_str(l)}" for k, l in enumerate(lts.labels)]
    _emit(args, "\n".join(labels + lines),
          {"states": [_conf_str(l) for l in lts.labels],
           "edges": [[s, str(a), t] for s, a, t in lts.edges()]})
    return 0


def _conf_str(label) -> str:
    if isinstance(label, tuple) and len(label) == 2:
        return f"{label[0]} [{label[1]}]"
    return str(label)


def cmd_bisim(args) -> int:
    p = parse_process(_text(args.left))
    q = parse_process(_text(args.right))
    res = weak_bisim(p, q) if args.weak else strong_bisim(p, q)
    kind = "weakly" if args.weak else "strongly"
    if res:
        _emit(args, f"{kind} bisimilar", {"bisimilar": True, "relation_size": len(res.relation)})
        return 0
    moves = [f"{side}:{a}" for side, a in res.distinguishing]
    _emit(args, f"not {kind} bisimilar\nattacker: {' '.join(moves)}",
          {"bisimilar": False, "attacker": moves})
    return 1


def _corpus(args):
    if args.process:
        return [parse_process(_text(p)) for p in args.process]
    return verify.gen_processes(_alphabet(args), args.depth, args.count, args.seed)


def _alphabet(args):
    if not args.alphabet:
        return verify.DEFAULT_ALPHABET
    return tuple(parse_action(a) for a in _split(args.alphabet))


def _split(text):
    from .parser import _split_top
    return [t for t in _split_top(text) if t.strip()]


def _enforcer_for(args):
    if args.enforcer:
        return parse_enforcer(_text(args.enforcer))
    if not args.formula:
        raise UsageError("give --enforcer or --formula")
    return enforcement.synth_enforcer(_formula(args.formula), normalize_first=True)


def _need_formula(args):
    if not args.formula:
        raise UsageError(f"check {args.property} needs --formula")
    return _formula(args.formula)


def cmd_check(args) -> int:
    prop = args.property
    if prop == "soundness":
        rep = verify.check_soundness(_enforcer_for(args), _need_formula(args), _corpus(args))
    elif prop == "transparency":
        rep = verify.check_transparency(_enforcer_for(args), _need_formula(args), _corpus(args))
    elif prop == "determinism":
        e = _enforcer_for(args)
        if args.trace:
            traces = [parse_trace(t) for t in args.trace]
        else:
            rng = random.Random(args.seed)
            traces = verify.random_traces(rng, _alphabet(args), args.count, args.bound or 6)
        rep = enforcement.check_determinism(e, traces, corpus=f"{len(traces)} traces")
    elif prop == "equivalence":
        f = _need_formula(args)
        g = _formula(args.formula2) if args.formula2 else norm.normalize(f)
        rep = verify.check_equivalence(f, g, _corpus(args))
    elif prop == "monitoring":
        f = _need_formula(args)
        m = parse_monitor(_text(args.monitor)) if args.monitor else detection.synth_monitor(f)
        rep = detection.check_monitoring(m, f, list(_corpus(args)), args.bound)
    else:
        rep = verify.check_enf_mon_bridge(_need_formula(args), _corpus(args), args.bound)
    if args.format == "json":
        print(rep.dumps())
    else:
        print(f"{rep.name}: {rep.verdict()} ({rep.checked} checked, {rep.corpus or 'given inputs'})")
        for c in rep.counterexamples:
            print("  counterexample: " + json.dumps(c, sort_keys=True))
    return 0 if rep.passed else 1


def cmd_gen_corpus(args) -> int:
    corpus = verify.gen_processes(_alphabet(args), args.depth, args.count, args.seed)
    items = [str(p) for p in corpus]
    _emit(args, "\n".join(items), {"corpus": corpus.id, "processes": items})
    return 0


# argument parsing

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["text", "json"], default="text")
    common.add_argument("--universe", help="finite value universe for enumeration fallbacks, e.g. '{i,j,0,1}'")

    ap = argparse.ArgumentParser(prog="shmlenf", parents=[common],
                                 description="Safety logic normalization, monitor and enforcer synthesis.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", parents=[common], help="echo the canonical form and classification")
    p.add_argument("input")
    p.add_argument("--kind", choices=["auto", *KINDS], default="auto")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("normalize", parents=[common], help="normalize a safety formula")
    p.add_argument("input")
    p.add_argument("--stage", choices=list(norm.STAGES), default="wf")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("synth-monitor", parents=[common], help="synthesize a detection monitor")
    p.add_argument("input")
    p.set_defaults(func=cmd_synth_monitor)

    p = sub.add_parser("synth-enforcer", parents=[common], help="normalize if needed and synthesize an enforcer")
    p.add_argument("input")
    p.set_defaults(func=cmd_synth_enforcer)

    p = sub.add_parser("eval", parents=[common], help="states of a process satisfying a formula")
    p.add_argument("input")
    p.add_argument("--process", required=True)
    p.add_argument("--strong-modalities", action="store_true",
                   help="let modalities range over single visible steps instead of weak moves")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sat", parents=[common], help="bounded search for a satisfying process")
    p.add_argument("input")
    p.add_argument("--bound", type=int, default=3)
    p.set_defaults(func=cmd_sat)

    p = sub.add_parser("simulate", parents=[common], help="run an enforcer or monitor")
    p.add_argument("--enforcer")
    p.add_argument("--monitor")
    p.add_argument("--process")
    p.add_argument("--trace")
    p.add_argument("--observable", action="store_true", help="drop suppressed (tau) outputs")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bisim", parents=[common], help="decide bisimilarity of two processes")
    p.add_argument("left")
    p.add_argument("right")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--strong", action="store_true", default=True)
    g.add_argument("--weak", action="store_true")
    p.set_defaults(func=cmd_bisim)

    p = sub.add_parser("check", parents=[common], help="corpus-relative property checks")
    p.add_argument("property", choices=["soundness", "transparency", "determinism",
                                        "equivalence", "monitoring", "bridge"])
    p.add_argument("--formula")
    p.add_argument("--formula2")
    p.add_argument("--enforcer")
    p.add_argument("--monitor")
    p.add_argument("--process", action="append", help="explicit corpus process (repeatable)")
    p.add_argument("--trace", action="append", help="explicit trace for determinism (repeatable)")
    p.add_argument("--alphabet")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--bound", type=int)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("gen-corpus", parents=[common], help="generate a reproducible process corpus")
    p.add_argument("--alphabet")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--depth", type=int, default=4)
    p.set_defaults(func=cmd_gen_corpus)
    return ap


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        set_universe(parse_universe(args.universe) if args.universe else None)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except FragmentExceeded as exc:
        cond = f" (condition: {exc.condition})" if exc.condition is not None else ""
        print(f"fragment exceeded: {exc}{cond}", file=sys.stderr)
        return 2
    except (ValueError, StateBudgetExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    finally:
        set_universe(None)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

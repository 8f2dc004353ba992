"""Command-line front end."""

import json

from shmlenf import catalog
from shmlenf.cli import run
from shmlenf.formula import alpha_equal
from shmlenf.parser import parse_formula

PHI0 = catalog.FORMULAE["phi0"]


def call(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_text(capsys):
    assert call(capsys, "parse", "tt")[:2] == (0, "tt : sHML-normal-form\n")


def test_parse_json(capsys):
    code, out, _ = call(capsys, "parse", "--format", "json", "tt")
    assert code == 0
    assert json.loads(out) == {"class": "sHML-normal-form", "kind": "formula", "term": "tt"}


def test_parse_error_exit_code(capsys):
    code, _, err = call(capsys, "parse", "[i?(req)")
    assert code == 2 and "column 9" in err


def test_normalize(capsys):
    code, out, _ = call(capsys, "normalize", catalog.FORMULAE["phi2"])
    assert code == 0 and alpha_equal(parse_formula(out), catalog.formula("phi2_nf"))


def test_synth_enforcer(capsys):
    code, out, _ = call(capsys, "synth-enforcer", PHI0)
    assert out.strip() == "rec x.[i?(req) -> i?(req)].rec y.([i!(ans) -> i!(ans)].x + [i?(req) -> tau].y)"


def test_simulate_from_file(tmp_path, capsys):
    path = tmp_path / "e2.enf"
    path.write_text(catalog.ENFORCERS["e2"] + "\n")
    code, out, _ = call(capsys, "simulate", "--enforcer", str(path), "--trace", "i?(req),i?(req),i!(ans)")
    assert (code, out) == (0, "i?(req),tau,i!(ans)\n")
    code, out, _ = call(capsys, "simulate", "--enforcer", str(path), "--trace",
                        "i?(req),i?(req),i!(ans)", "--observable")
    assert out == "i?(req),i!(ans)\n"


def test_bisim_exit_codes(capsys):
    p1, s1 = catalog.PROCESSES["p1"], catalog.PROCESSES["s1"]
    assert call(capsys, "bisim", "--weak", p1, s1)[0] == 0
    assert call(capsys, "bisim", p1, s1)[0] == 1


def test_failing_check_exit_code(capsys):
    code, out, _ = call(capsys, "check", "soundness", "--enforcer", catalog.ENFORCERS["e3"],
                        "--formula", PHI0, "--count", "10")
    assert code == 1 and out.startswith("soundness: fail")


def test_passing_check(capsys):
    code, out, _ = call(capsys, "check", "soundness", "--enforcer", catalog.ENFORCERS["e0"],
                        "--formula", PHI0, "--count", "10")
    assert code == 0 and "pass on corpus" in out


def test_json_is_stable(capsys):
    argv = ["check", "transparency", "--format", "json", "--enforcer", catalog.ENFORCERS["e1"],
            "--formula", catalog.FORMULAE["phi1"], "--count", "8", "--seed", "3"]
    code1, a, _ = call(capsys, *argv)
    code2, b, _ = call(capsys, *argv)
    assert code1 == code2 == 1 and a == b
    assert json.loads(a)["verdict"] == "fail"


def test_gen_corpus(capsys):
    code, out, _ = call(capsys, "gen-corpus", "--count", "3", "--seed", "1")
    assert code == 0 and out.splitlines() == [catalog.PROCESSES[n] for n in ("p1", "q1", "r1")]


def test_usage_error(capsys):
    code, _, err = call(capsys, "nonsense")
    assert code == 2 and "invalid choice" in err


def test_synthesis_of_open_formula_is_input_error(capsys):
    assert call(capsys, "synth-enforcer", "[i?(req)]Y")[0] == 2

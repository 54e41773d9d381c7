import json
import subprocess
import sys
from fractions import Fraction

import pytest

from convenient.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main
from convenient.exponential import laws
from convenient.poly import PolyMap, linear_map, poly_to_json


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        p = tmp_path / name
        p.write_text(text if isinstance(text, str) else json.dumps(text))
        return str(p)

    return write


def cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# -- axioms ------------------------------------------------------------------------------


def test_axioms_passes(capsys):
    code, out, _ = cli(capsys, "axioms", "--space", "R^2", "--cases", "5")
    rep = json.loads(out)
    assert code == EXIT_OK and rep["summary"]["passed"]
    assert rep["config"] == {"space": "R^2", "order": 2, "cases": 5, "seed": 0, "tol": None}


def test_axioms_degenerate_and_empty(capsys):
    code, out, _ = cli(capsys, "axioms", "--space", "R^0", "--cases", "3")
    assert code == EXIT_OK and json.loads(out)["summary"]["passed"]
    code, out, _ = cli(capsys, "axioms", "--cases", "0")
    assert code == EXIT_OK and json.loads(out)["summary"]["no_cases"]


@pytest.mark.parametrize("argv", [
    ["--space", "R^7"], ["--space", "!R^2"], ["--space", "banana"], ["--order", "7"], ["--order", "-1"],
    ["--cases", "-2"],
])
def test_axioms_usage_errors(capsys, argv):
    code, _, err = cli(capsys, "axioms", *argv)
    assert code == EXIT_USAGE and "error" in err


def test_axioms_reports_law_failure(capsys, monkeypatch):
    broken = laws.Law("broken", "1 = 2", "differential", lambda rng, n, order: ({}, Fraction(1), Fraction(2)))
    monkeypatch.setattr(laws, "LAWS", laws.LAWS + [broken])
    code, out, _ = cli(capsys, "axioms", "--cases", "2")
    rep = json.loads(out)
    assert code == EXIT_FAIL and not rep["summary"]["passed"]
    failing = [law for law in rep["laws"] if not law["passed"]]
    assert [law["name"] for law in failing] == ["broken"]
    assert failing[0]["failures"][0]["residual"] == "1"


def test_axioms_table_and_out(capsys, tmp_path):
    code, out, _ = cli(capsys, "axioms", "--cases", "2", "--format", "table")
    assert code == EXIT_OK and out.splitlines()[0].split()[:2] == ["law", "suite"]
    assert out.splitlines()[-1] == f"0 of {len(laws.LAWS)} laws failed"
    target = tmp_path / "rep.json"
    code, out, _ = cli(capsys, "axioms", "--cases", "2", "--out", str(target))
    assert code == EXIT_OK and out == "" and json.loads(target.read_text())["summary"]["passed"]


def test_axioms_byte_identical_across_processes(tmp_path):
    outs = []
    for jobs in ("1", "1", "3"):
        target = tmp_path / f"r{len(outs)}.json"
        subprocess.run(
            [sys.executable, "-m", "convenient", "axioms", "--space", "R^3", "--order", "3", "--cases", "20",
             "--seed", "42", "--jobs", jobs, "--out", str(target)],
            check=True,
        )
        outs.append(target.read_bytes())
    assert outs[0] == outs[1] == outs[2]


# -- eval ------------------------------------------------------------------------------------


def test_eval_ok(capsys, files):
    term = files("t.dll", "derelict(coder(v))\n")
    env = files("env.json", {"v": {"type": "R^2", "value": ["1", "2"]}})
    code, out, _ = cli(capsys, "eval", term, env)
    assert code == EXIT_OK
    assert json.loads(out) == {"line": 1, "name": None, "type": "R^2", "value": ["1", "2"]}


def test_eval_unit_law(capsys, files):
    delta = {"terms": [{"coeff": "1", "base": ["3", "-1"], "dirs": []}]}
    term = files("t.dll", "cocontract(coweaken(), b)\n")
    env = files("env.json", {"b": {"type": "!R^2", "value": delta}})
    code, out, _ = cli(capsys, "eval", term, env)
    assert code == EXIT_OK and json.loads(out)["value"] == delta


def test_eval_multiple_lines(capsys, files):
    term = files("t.dll", "c : !R^1 = coder([2])\nweaken(c)\n")
    code, out, _ = cli(capsys, "eval", term)
    res = json.loads(out)
    assert code == EXIT_OK and [r["line"] for r in res] == [1, 2] and res[1]["value"] == "0"


@pytest.mark.parametrize("text, where", [
    ("x : R^1 = [1]\ny : R^1 = x (x) x\n", ":2:"),
    ("coder(\n", ":1:7:"),
    ("derelict([1, 2])\n", ":1:10:"),
])
def test_eval_failures_exit_one(capsys, files, text, where):
    term = files("bad.dll", text)
    code, _, err = cli(capsys, "eval", term)
    assert code == EXIT_FAIL and f"bad.dll{where}" in err
    assert "?" not in err


def test_eval_usage_errors(capsys, files, tmp_path):
    assert cli(capsys, "eval", str(tmp_path / "missing.dll"))[0] == EXIT_USAGE
    term = files("t.dll", "v\n")
    env = files("env.json", {"v": {"type": "R^2", "value": ["1"]}})
    assert cli(capsys, "eval", term, env)[0] == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["eval"])
    assert exc.value.code == EXIT_USAGE


# -- diff ------------------------------------------------------------------------------------


def test_diff_examples(capsys, files):
    x2y = files("p.json", poly_to_json(PolyMap.build(2, 1, {(0, (2, 1)): 1})))
    code, out, _ = cli(capsys, "diff", x2y, "--point", "1,2", "--direction", "1,0")
    assert code == EXIT_OK and json.loads(out) == ["4"]
    code, out, _ = cli(capsys, "diff", x2y, "--point", "1/2,7", "--direction", "0,0")
    assert json.loads(out) == ["0"]
    ell = files("l.json", poly_to_json(linear_map([[3, -1], [0, 2]])))
    code, out, _ = cli(capsys, "diff", ell, "--point", "9,9", "--direction", "1,1")
    assert json.loads(out) == ["2", "2"]


@pytest.mark.parametrize("point, direction", [("1", "1,0"), ("1,2", "1,0,0"), ("a,b", "1,0")])
def test_diff_usage_errors(capsys, files, point, direction):
    x2y = files("p.json", poly_to_json(PolyMap.build(2, 1, {(0, (2, 1)): 1})))
    code, _, err = cli(capsys, "diff", x2y, "--point", point, "--direction", direction)
    assert code == EXIT_USAGE and "error" in err


def test_diff_bad_polynomial(capsys, files):
    assert cli(capsys, "diff", files("p.json", "{}"), "--point", "1", "--direction", "1")[0] == EXIT_USAGE


# -- curve ------------------------------------------------------------------------------------


def _csv(fn, ks, den):
    return "t,x1\n" + "\n".join(f"{Fraction(k, den)},{fn(Fraction(k, den))}" for k in ks) + "\n"


def test_curve_square(capsys, files):
    path = files("sq.csv", _csv(lambda s: s * s, range(-8, 9), 8))
    code, out, _ = cli(capsys, "curve", path, "--order", "2")
    res = json.loads(out)
    assert code == EXIT_OK
    assert {row["value"][0] for row in res["table"]["2"]} == {"2"}


def test_curve_abs(capsys, files):
    path = files("abs.csv", _csv(abs, range(-16, 17), 16))
    code, out, _ = cli(capsys, "curve", path, "--order", "2")
    assert code == EXIT_OK and json.loads(out)["report"]["verdict"] == "non-smooth at order 2"


def test_curve_insufficient_samples(capsys, files):
    path = files("one.csv", "t,x1\n0,0\n")
    code, _, err = cli(capsys, "curve", path, "--order", "1")
    assert code == EXIT_USAGE and "need at least 2 samples" in err


def test_curve_malformed(capsys, files):
    assert cli(capsys, "curve", files("bad.csv", "t,x1\n1,0\n0,1\n"), "--order", "1")[0] == EXIT_USAGE

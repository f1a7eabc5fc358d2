import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from wadgebench import dsl
from wadgebench.cli import corpus_text, main

ROOT = Path(__file__).parent.parent
CORPORA = ROOT / "corpora"


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def run_json(*argv):
    code, text = run("--json", *argv)
    return code, json.loads(text)


def test_dist():
    assert run("dist", "D1", "3 ~ 0", "5 ~ 0") == (0, "31/16\n")
    code, report = run_json("dist", "d0", "3 ~ 0", "5 ~ 0")
    assert code == 0 and report["distance"] == "5" and report["metric"] == "D0"


def test_verify_exit_codes():
    swap = "flm{0->1, 1->0; default=id}"
    code, text = run("verify", swap, ":", "N(0)", "->", "N(1)")
    assert code == 0 and text.startswith("Holds (exact")
    code, text = run("verify", "id", ":", "N(0)", "->", "N(1)")
    assert code == 1 and "counterexample" in text
    code, text = run("verify", swap, ":", "N(0)", "→", "N(1)", "--sample", "200")
    assert code == 0 and "sampled" in text


def test_certify_exit_codes():
    add1 = "flm{; default=add(1)}"
    assert run("certify", "D0", add1, "--constant", "1")[0] == 1
    code, text = run("certify", "D0", add1, "--constant", "2")
    assert code == 0 and text.startswith("Certified D0 constant=2")
    code, report = run_json("certify", "D0", "flm{; default=sq1}")
    assert code == 0 and report["certificate"] == "NotLipschitz"


def test_leq_and_game():
    code, text = run("leq", "L", "N(0)", "N(1)")
    assert code == 0 and text.splitlines()[0] == "Holds"
    code, report = run_json("leq", "Cr(1/4)", "N(0)", "cat(0; N(0))")
    assert code == 0 and report["verdict"] == "Fails"
    code, report = run_json("game", "L", "!(hits(0))", "hits(0)", "--witness")
    assert report["winner"] == "I" and report["strategy_checked"]
    code, text = run("game", "W", "hits(0)", "N(0)")
    assert text.startswith("winner I")


def test_selfdual_selfcontract_fixpoint():
    assert run("selfdual", "L", "N(0)") == (0, "true\n")
    code, report = run_json("selfcontract", "hits(0)")
    assert code == 0 and report["contractible"] and report["check"]["holds"]
    assert run("fixpoint", "prepend(2 1)") == (0, "~ 2 1\n")


def test_usage_and_input_errors(capsys):
    assert run("nonsense")[0] == 2
    assert run("leq", "L", "N(0", "N(1)")[0] == 2
    assert "parse error: 1:4:" in capsys.readouterr().err
    assert run("leq", "Borel", "N(0)", "N(1)")[0] == 2
    assert run("fixpoint", "id")[0] == 2
    assert run("parse", str(ROOT / "missing.wdg"))[0] == 2


def test_defs_file(tmp_path):
    defs = tmp_path / "defs.wdg"
    defs.write_text("let a = N(0); let f = flm{0->1, 1->0; default=id};\n")
    code, text = run("--defs", str(defs), "verify", "f", ":", "a", "->", "N(1)")
    assert code == 0 and text.startswith("Holds")
    code, _ = run("selfdual", "L", "a", "--defs", str(defs))
    assert code == 0


def test_run_examples():
    code, report = run_json("run", str(CORPORA / "examples.wdg"))
    assert code == 0 and report["violations"] == 0
    assert all(r["ok"] for r in report["results"])


def test_run_reports_unmet_expectations(tmp_path):
    prog = tmp_path / "bad.wdg"
    prog.write_text("leq L N(0) N(1) expect Fails;\n")
    code, text = run("run", str(prog))
    assert code == 1 and "[FAIL] line 1" in text


@pytest.mark.parametrize("path", sorted(CORPORA.glob("*.wdg")), ids=lambda p: p.name)
def test_fmt_round_trip(path, tmp_path):
    code, text = run("fmt", str(path))
    assert code == 0
    assert dsl.parse(text) == dsl.parse(path.read_text())
    copy = tmp_path / path.name
    copy.write_text(text)
    assert run("fmt", str(copy))[1] == text


def test_fmt_write(tmp_path):
    f = tmp_path / "a.wdg"
    f.write_text("let   a=N( 0 );\n")
    assert run("fmt", str(f), "--write")[0] == 0
    assert f.read_text() == "let a = N(0);\n"


def test_parse_check():
    code, text = run("parse", str(CORPORA / "examples.wdg"), "--check")
    assert code == 0 and text.startswith("ok: ")


def test_json_is_byte_identical():
    argv = ("--json", "--seed", "11", "construct", "psi1", "--samples", "300")
    first, second = run(*argv), run(*argv)
    assert first == second and first[0] == 0
    report = json.loads(first[1])
    assert report["seed"] == 11 and report["timing"] is None


def test_timing_is_opt_in():
    _, report = run_json("--timing", "dist", "D", "~ 0", "~ 1")
    assert report["timing"]["seconds"] >= 0


def test_hasse_dot(tmp_path):
    dot = tmp_path / "h.dot"
    code, report = run_json("hasse", str(CORPORA / "depth1.wdg"), "--dot", str(dot))
    assert code == 0 and report["acyclic"]
    text = dot.read_text()
    assert text.startswith('digraph "L"') and "->" in text
    assert len(report["minimal"]) == 2


def test_corpus_enumerate_matches_shipped():
    text, n = corpus_text(1, 2)
    assert text == (CORPORA / "depth1.wdg").read_text()
    code, out = run("corpus", "enumerate", "--depth", "1", "--letters", "2")
    assert code == 0 and out == text


def test_construct_and_pack_verbs():
    assert run("construct", "cor5", "--bits", "0101")[1].endswith("states\n")
    assert run("construct", "counterexamples")[0] == 0
    assert run("construct", "thm-psi", "--samples", "200")[0] == 0
    assert run("construct", "claim-psi", "--bits", "10", "--samples", "200")[0] == 0
    assert run("construct", "shrink")[0] == 0
    assert run("construct", "cor5", "--bits", "012")[0] == 2
    code, report = run_json("pack", "list")
    assert "a-family" in report["packs"]
    assert run("pack", "run", "counterexamples")[0] == 0
    assert run("pack", "run", "nope")[0] == 2


def test_console_entry_points():
    res = subprocess.run([sys.executable, "-m", "wadgebench", "dist", "D", "1 ~ 0", "1 2 ~ 0"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and res.stdout == "1/2\n"

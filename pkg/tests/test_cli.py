"""Command-line interface: subcommands, exit codes, report artifacts."""

import json

import pytest

from randworlds.cli import main
from randworlds.defaults import CORPUS_DIR

HEP = str(CORPUS_DIR / "hepatitis.rwkb")
TRIV = str(CORPUS_DIR / "trivial_p.rwkb")
POOLE = str(CORPUS_DIR / "poole_partition.rwkb")
P1P2 = str(CORPUS_DIR / "p1p2.rwkb")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_eval_json(capsys):
    code, out = run(capsys, "eval", "--kb", TRIV, "--query", "P(c)", "--json")
    obj = json.loads(out)
    assert code == 0
    assert obj["estimate"] == {"value": "1/2", "status": "converged"}


def test_eval_human_readable(capsys):
    code, out = run(capsys, "eval", "--kb", TRIV, "--query", "P(c)")
    assert code == 0
    assert "estimate: 1/2" in out and "[converged]" in out


def test_eval_undefined_exit_code(capsys):
    code, out = run(capsys, "eval", "--kb", TRIV,
                    "--query", "P(c)", "--sizes", "2,3",
                    "--stages", "1/8")
    assert code == 0  # still converged: Pr is exactly 1/2 at each N
    code, _ = run(capsys, "eval", "--kb", POOLE, "--query", "Bird(Tweety)",
                  "--n-max", "5")
    assert code == 3


def test_eval_report_files(tmp_path, capsys):
    code, out = run(capsys, "eval", "--kb", TRIV, "--query", "P(c)",
                    "--report-dir", str(tmp_path), "--json")
    assert code == 0
    assert (tmp_path / "grid.csv").exists()
    assert (tmp_path / "convergence.png").exists()
    header = (tmp_path / "grid.csv").read_text().splitlines()[0]
    assert header == "N,stage,value,value_decimal,defined"


def test_count(capsys):
    code, out = run(capsys, "count", "--kb", TRIV, "--n", "3")
    obj = json.loads(out)
    assert code == 0
    assert obj == {"count": "24", "total": "24", "defined": True}


def test_maxent_command(capsys):
    code, out = run(capsys, "maxent", "--kb", P1P2, "--query", "P2(c)",
                    "--json")
    obj = json.loads(out)
    assert code == 0
    assert abs(obj["query_answer"] - 0.3) < 1e-6
    assert obj["kkt_residual"] < 1e-8


def test_eval_maxent_method(capsys):
    code, out = run(capsys, "eval", "--kb", P1P2, "--query", "P2(c)",
                    "--method", "maxent", "--json")
    assert code == 0
    assert abs(json.loads(out)["value"] - 0.3) < 1e-6


def test_budget_env_and_flag(capsys, monkeypatch):
    monkeypatch.setenv("RW_BUDGET", "10")
    code, _ = run(capsys, "eval", "--kb", TRIV, "--query", "P(c)")
    assert code == 1  # env budget too small
    code, _ = run(capsys, "eval", "--kb", TRIV, "--query", "P(c)",
                  "--budget", "100000000")
    assert code == 0  # flag beats environment


def test_missing_kb_file(capsys):
    code = main(["eval", "--kb", "/nonexistent.rwkb", "--query", "true"])
    assert code == 1


def test_bad_query(capsys):
    code = main(["eval", "--kb", TRIV, "--query", "Zebra(c)"])
    assert code == 1

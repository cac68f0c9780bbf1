"""Report rendering: delimited grid and convergence figure."""

import csv

from randworlds.limits import degree_of_belief
from randworlds.parser import parse_formula, parse_kb
from randworlds.report import write_report


def test_report_artifacts(tmp_path):
    vocab, kb = parse_kb("predicate P/1; const c;")
    q = parse_formula("P(c)", vocab)
    est = degree_of_belief(vocab, q, kb)
    paths = write_report(est, tmp_path, ["1/4", "1/8", "1/16"], "P(c)")
    assert [p.name for p in paths] == ["grid.csv", "convergence.png"]

    with open(paths[0]) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == len(est.grid)
    assert rows[0]["value"] == "1/2"
    assert rows[0]["defined"] == "true"
    assert float(rows[0]["value_decimal"]) == 0.5

    png = paths[1].read_bytes()
    assert png[:8] == b"\x89PNG\r\n\x1a\n"


def test_report_handles_undefined_cells(tmp_path):
    vocab, kb = parse_kb("predicate P/1; const c;\nP(c) and not P(c).\n")
    q = parse_formula("P(c)", vocab)
    est = degree_of_belief(vocab, q, kb)
    paths = write_report(est, tmp_path, ["1/4", "1/8", "1/16"], "P(c)")
    with open(paths[0]) as fh:
        rows = list(csv.DictReader(fh))
    assert all(r["defined"] == "false" for r in rows)
    assert paths[1].exists()

"""Rendering of evaluation reports: delimited grid plus convergence figure."""

from __future__ import annotations

import csv
from pathlib import Path

from .limits import BeliefEstimate


def write_grid_csv(est: BeliefEstimate, path: Path, stage_labels: list[str]):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["N", "stage", "value", "value_decimal", "defined"])
        for cell in est.grid:
            label = stage_labels[cell.stage]
            if cell.prob.defined:
                v = cell.prob.value
                w.writerow([cell.N, label,
                            f"{v.numerator}/{v.denominator}",
                            f"{float(v):.9f}", "true"])
            else:
                w.writerow([cell.N, label, "", "", "false"])


def write_convergence_png(est: BeliefEstimate, path: Path,
                          stage_labels: list[str], query: str):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    n_stages = len(stage_labels)
    for s in range(n_stages):
        xs = [c.N for c in est.grid if c.stage == s and c.prob.defined]
        ys = [float(c.prob.value)
              for c in est.grid if c.stage == s and c.prob.defined]
        if xs:
            ax.plot(xs, ys, marker="o", label=f"tau = {stage_labels[s]}")
    if est.value is not None:
        ax.axhline(float(est.value), color="gray", linestyle="--",
                   linewidth=0.8, label="estimate")
    ax.set_xlabel("domain size N")
    ax.set_ylabel("exact conditional probability")
    ax.set_title(f"{query}  [{est.status}]")
    ax.set_ylim(-0.05, 1.05)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_report(est: BeliefEstimate, outdir: Path, stage_labels: list[str],
                 query: str) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = outdir / "grid.csv"
    png_path = outdir / "convergence.png"
    write_grid_csv(est, csv_path, stage_labels)
    write_convergence_png(est, png_path, stage_labels, query)
    return [csv_path, png_path]

"""Aggregation of run records into summary tables, curve data, and figures.

Everything here is a pure function of the JSON-lines metrics file: running
report twice on the same input produces identical tables. Wall-time and
cost statistics cover successful runs only. The success-vs-evaluations
curve gives, per planner, the fraction of all runs solved within x
environment evaluations.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from pathlib import Path

from .metrics import RunMetrics

SUMMARY_FIELDS = [
    "planner", "runs", "successes", "success_rate",
    "wall_time_mean", "wall_time_ci95",
    "cost_mean", "cost_ci95",
    "expansions_mean", "evaluations_mean",
]


def _mean(xs: list[float]) -> float | None:
    return sum(xs) / len(xs) if xs else None


def _ci95(xs: list[float]) -> float | None:
    if len(xs) < 2:
        return 0.0 if xs else None
    m = sum(xs) / len(xs)
    var = sum((x - m) ** 2 for x in xs) / (len(xs) - 1)
    return 1.96 * math.sqrt(var / len(xs))


def aggregate(records: list[RunMetrics]) -> list[dict]:
    """Per-planner summary rows, sorted by planner name."""
    groups: dict[str, list[RunMetrics]] = defaultdict(list)
    for r in records:
        groups[r.planner].append(r)
    rows = []
    for planner in sorted(groups):
        runs = groups[planner]
        ok = [r for r in runs if r.success]
        walls = [r.wall_time for r in ok]
        costs = [r.solution_cost for r in ok if r.solution_cost is not None]
        rows.append({
            "planner": planner,
            "runs": len(runs),
            "successes": len(ok),
            "success_rate": len(ok) / len(runs) if runs else 0.0,
            "wall_time_mean": _mean(walls),
            "wall_time_ci95": _ci95(walls),
            "cost_mean": _mean(costs),
            "cost_ci95": _ci95(costs),
            "expansions_mean": _mean([float(r.expansions) for r in runs]),
            "evaluations_mean": _mean([float(r.evaluations) for r in runs]),
        })
    return rows


def curve_points(records: list[RunMetrics]) -> dict[str, list[tuple[int, float]]]:
    """Per planner: (evaluations, solved fraction) samples, non-decreasing."""
    groups: dict[str, list[RunMetrics]] = defaultdict(list)
    for r in records:
        groups[r.planner].append(r)
    out: dict[str, list[tuple[int, float]]] = {}
    for planner, runs in sorted(groups.items()):
        n = len(runs)
        solved_at = sorted(r.evaluations for r in runs if r.success)
        pts = []
        for i, e in enumerate(solved_at, start=1):
            pts.append((int(e), i / n))
        out[planner] = pts
    return out


def solved_fraction_at(records: list[RunMetrics], planner: str, budget: int) -> float:
    """Fraction of this planner's runs solved within the given evaluations."""
    runs = [r for r in records if r.planner == planner]
    if not runs:
        return 0.0
    return sum(1 for r in runs if r.success and r.evaluations <= budget) / len(runs)


def write_summary_csv(rows: list[dict], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SUMMARY_FIELDS)
        w.writeheader()
        for row in rows:
            w.writerow({k: ("" if row[k] is None else row[k]) for k in SUMMARY_FIELDS})


def write_curve_csv(curves: dict[str, list[tuple[int, float]]], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["planner", "evaluations", "solved_fraction"])
        for planner in sorted(curves):
            for e, frac in curves[planner]:
                w.writerow([planner, e, frac])


def render_figures(records: list[RunMetrics], out_dir: str | Path) -> list[Path]:
    """Render the summary figures next to the CSV output; returns the files."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    rows = aggregate(records)
    if rows:
        fig, ax = plt.subplots(figsize=(5.0, 3.2))
        names = [r["planner"] for r in rows]
        rates = [r["success_rate"] for r in rows]
        ax.bar(names, rates, color="tab:blue")
        ax.set_ylim(0, 1.05)
        ax.set_ylabel("success rate")
        ax.set_title("Path found")
        ax.tick_params(axis="x", rotation=20)
        fig.tight_layout()
        p = out_dir / "success_rate.png"
        fig.savefig(p, dpi=150)
        plt.close(fig)
        written.append(p)

    curves = curve_points(records)
    if any(curves.values()):
        fig, ax = plt.subplots(figsize=(5.0, 3.2))
        for planner, pts in sorted(curves.items()):
            if not pts:
                continue
            xs = [0] + [p_[0] for p_ in pts]
            ys = [0.0] + [p_[1] for p_ in pts]
            ax.step(xs, ys, where="post", label=planner)
        ax.set_xlabel("edge evaluations")
        ax.set_ylabel("solved fraction")
        ax.set_title("Success vs evaluations")
        ax.legend(fontsize=8)
        fig.tight_layout()
        p = out_dir / "success_vs_evaluations.png"
        fig.savefig(p, dpi=150)
        plt.close(fig)
        written.append(p)
    return written


def write_report(records: list[RunMetrics], out_dir: str | Path,
                 figures: bool = True) -> dict:
    """Emit summary.csv, curve.csv, and (optionally) the figures."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = aggregate(records)
    write_summary_csv(rows, out_dir / "summary.csv")
    write_curve_csv(curve_points(records), out_dir / "curve.csv")
    if figures:
        render_figures(records, out_dir)
    return {"rows": rows}

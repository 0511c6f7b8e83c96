"""Command-line harness: instance generation, single runs, benchmark
sweeps, closed-loop execution, and report rendering.
"""

from __future__ import annotations

import sys
from pathlib import Path as FsPath

import click

from .bench import PLANNERS, ClosedLoopConfig, closed_loop, replay_path, run_planner, save_path
from .config import load_config, write_config
from .envs import TASKS, generate_instance, load_instance, save_instance
from .graph import InternalFaultError
from .metrics import append_jsonl, read_jsonl
from .report import write_report


@click.group()
def main():
    """Actor-critic guided parallel search benchmark harness."""


def _common_overrides(cfg, workers, weight, batch, budget):
    if workers is not None:
        cfg["workers"] = workers
    if weight is not None:
        cfg["w"] = weight
    if batch is not None:
        cfg["batch_size"] = batch
    if budget is not None:
        cfg["eval_budget"] = budget
    return cfg


@main.command("gen-instances")
@click.option("--task", type=click.Choice(TASKS), required=True)
@click.option("--count", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def gen_instances(task, count, seed, config_path, out_dir):
    """Write COUNT seeded instance files for TASK."""
    if count < 1:
        raise click.BadParameter("count must be >= 1")
    cfg = load_config(config_path)
    out = FsPath(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for s in range(seed, seed + count):
        inst = generate_instance(task, s, cfg)
        save_instance(inst, out / f"{inst.name}.inst")
    click.echo(f"wrote {count} {task} instances to {out}")


@main.command("plan")
@click.option("--instance", "instance_path", type=click.Path(exists=True), required=True)
@click.option("--planner", type=click.Choice(PLANNERS), required=True)
@click.option("--workers", type=int, default=None)
@click.option("--weight", type=float, default=None)
@click.option("--batch", type=int, default=None)
@click.option("--budget", type=int, default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def plan(instance_path, planner, workers, weight, batch, budget, seed, config_path, out_dir):
    """Run one planner on one instance; write metrics and, on success, the path."""
    cfg = _common_overrides(load_config(config_path), workers, weight, batch, budget)
    inst = load_instance(instance_path)
    result = run_planner(inst, planner, cfg, seed)
    out = FsPath(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if result.metrics.success:
        # The path must replay cleanly through a fresh environment before
        # it is persisted.
        replay_path(inst, result.path)
        save_path(result.path, out / f"{inst.name}-{planner}-s{seed}.path")
    append_jsonl(out / "metrics.jsonl", result.metrics)
    click.echo(result.metrics.to_json())


@main.command("bench")
@click.option("--instances", "instance_dir", type=click.Path(exists=True), required=True)
@click.option("--planners", "planner_list", default="pachs", show_default=True,
              help="comma-separated planner names")
@click.option("--reps", type=int, default=None, help="repetitions per instance")
@click.option("--workers", type=int, default=None)
@click.option("--weight", type=float, default=None)
@click.option("--batch", type=int, default=None)
@click.option("--budget", type=int, default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def bench(instance_dir, planner_list, reps, workers, weight, batch, budget, seed,
          config_path, out_dir):
    """Run planners x instances x repetitions; emit JSONL, CSVs, figures."""
    cfg = _common_overrides(load_config(config_path), workers, weight, batch, budget)
    reps = reps if reps is not None else int(cfg["bench_reps"])
    planners = [p.strip() for p in planner_list.split(",") if p.strip()]
    for p in planners:
        if p not in PLANNERS:
            raise click.BadParameter(f"unknown planner {p!r}")
    paths = sorted(FsPath(instance_dir).glob("*.inst"))
    if not paths:
        raise click.ClickException(f"no *.inst files in {instance_dir}")
    out = FsPath(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    metrics_path = out / "metrics.jsonl"
    for ipath in paths:
        inst = load_instance(ipath)
        for planner in planners:
            for rep in range(reps):
                run_seed = seed + rep
                try:
                    result = run_planner(inst, planner, cfg, run_seed)
                    if result.metrics.success:
                        replay_path(inst, result.path)
                    rec = result.metrics
                except InternalFaultError:
                    raise
                except Exception as exc:  # recorded, sweep continues
                    from .metrics import RunMetrics
                    rec = RunMetrics(
                        success=False, status="error", planner=planner,
                        instance=inst.name, seed=run_seed, error=repr(exc),
                    )
                append_jsonl(metrics_path, rec)
    records = read_jsonl(metrics_path)
    write_report(records, out)
    click.echo(f"wrote {metrics_path}, summary.csv, curve.csv and figures to {out}")


@main.command("closed-loop")
@click.option("--instance", "instance_path", type=click.Path(exists=True), required=True)
@click.option("--planner", type=click.Choice(("pachs", "parallel-rollout", "single-rollout")),
              required=True)
@click.option("--budget", type=int, default=None, help="evaluations per planning query")
@click.option("--time-budget", type=float, default=None, help="seconds per planning query")
@click.option("--horizon", type=int, default=None)
@click.option("--replans", type=int, default=None)
@click.option("--workers", type=int, default=None)
@click.option("--weight", type=float, default=None)
@click.option("--batch", type=int, default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def closed_loop_cmd(instance_path, planner, budget, time_budget, horizon, replans,
                    workers, weight, batch, seed, config_path, out_dir):
    """Plan-execute-observe against an independent world environment."""
    cfg = _common_overrides(load_config(config_path), workers, weight, batch, None)
    cl = ClosedLoopConfig(
        eval_budget=budget if budget is not None else int(cfg["cl_eval_budget"]),
        time_budget=time_budget if time_budget is not None
        else (float(cfg["cl_time_budget"]) or None),
        horizon=horizon if horizon is not None else int(cfg["cl_horizon"]),
        max_replans=replans if replans is not None else int(cfg["cl_max_replans"]),
    )
    inst = load_instance(instance_path)
    rec = closed_loop(inst, planner, cfg, cl, seed)
    out = FsPath(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    append_jsonl(out / "metrics.jsonl", rec)
    click.echo(rec.to_json())


@main.command("report")
@click.option("--metrics", "metrics_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--no-figures", is_flag=True, default=False)
def report_cmd(metrics_path, out_dir, no_figures):
    """Aggregate a metrics JSONL file into tables, curve data, and figures."""
    try:
        records = read_jsonl(metrics_path)
    except ValueError as exc:
        raise click.ClickException(str(exc))
    write_report(records, out_dir, figures=not no_figures)
    click.echo(f"report written to {out_dir}")


@main.command("write-config")
@click.option("--out", "out_path", type=click.Path(), required=True)
def write_config_cmd(out_path):
    """Write the default configuration to a file."""
    write_config(load_config(), out_path)
    click.echo(f"default config written to {out_path}")


if __name__ == "__main__":
    sys.exit(main())

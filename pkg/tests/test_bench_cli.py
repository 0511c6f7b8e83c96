import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from pachs.bench import ClosedLoopConfig, closed_loop, load_path, replay_path, run_planner, save_path
from pachs.cli import main
from pachs.config import DEFAULTS, load_config, write_config
from pachs.envs import build_problem, generate_instance, load_instance, save_instance
from pachs.graph import InternalFaultError
from pachs.metrics import PlanStatus, RunMetrics, append_jsonl, read_jsonl
from pachs.report import aggregate, curve_points, solved_fraction_at, write_report


@pytest.fixture(scope="module")
def cfg():
    return load_config()


@pytest.fixture(scope="module")
def nav_instance(cfg):
    return generate_instance("nav_shelf", 0, cfg)


# -- config ----------------------------------------------------------------------

def test_default_config_file_in_sync(tmp_path):
    repo_cfg = Path(__file__).parent.parent / "configs" / "default.cfg"
    assert load_config(repo_cfg) == dict(DEFAULTS)


def test_config_roundtrip(tmp_path):
    cfg = load_config()
    cfg["w"] = 2.5
    p = tmp_path / "c.cfg"
    write_config(cfg, p)
    assert load_config(p)["w"] == 2.5


def test_config_rejects_unknown_key(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("definitely_not_a_key 3\n")
    with pytest.raises(ValueError, match="unknown config key"):
        load_config(p)


# -- single runs + path persistence ------------------------------------------------

def test_run_planner_trivial_instance(cfg, nav_instance, tmp_path):
    inst = load_instance_copy(nav_instance, tmp_path)
    inst.vectors["goal"] = list(inst.vectors["start"])  # start == goal
    r = run_planner(inst, "pachs", cfg, seed=0)
    assert r.status is PlanStatus.GOAL_REACHED
    assert r.path.total_cost == 0.0
    assert r.metrics.expansions == 0


def load_instance_copy(inst, tmp_path):
    p = tmp_path / "copy.inst"
    save_instance(inst, p)
    return load_instance(p)


def test_run_planner_deterministic_metrics(cfg, nav_instance):
    r1 = run_planner(nav_instance, "pachs", cfg, seed=3)
    r2 = run_planner(nav_instance, "pachs", cfg, seed=3)
    assert r1.metrics.key_fields() == r2.metrics.key_fields()


def test_path_roundtrip_and_replay(cfg, nav_instance, tmp_path):
    r = run_planner(nav_instance, "pachs", cfg, seed=1)
    assert r.metrics.success
    p = tmp_path / "x.path"
    save_path(r.path, p)
    back = load_path(p)
    assert back.total_cost == r.path.total_cost
    assert back.complete == r.path.complete
    assert len(back.actions) == len(r.path.actions)
    total = replay_path(nav_instance, back)
    assert abs(total - r.metrics.solution_cost) <= 1e-9


def test_replay_detects_tampering(cfg, nav_instance):
    r = run_planner(nav_instance, "pachs", cfg, seed=1)
    assert r.metrics.success and len(r.path.actions) >= 1
    r.path.costs[0] += 0.5
    with pytest.raises(InternalFaultError):
        replay_path(nav_instance, r.path)


# -- metrics jsonl ------------------------------------------------------------------

def test_metrics_jsonl_roundtrip(tmp_path):
    p = tmp_path / "m.jsonl"
    rec = RunMetrics(success=True, status="goal_reached", wall_time=0.5,
                     solution_cost=1.25, expansions=10, evaluations=40,
                     planner="pachs", instance="i", seed=3)
    append_jsonl(p, rec)
    back = read_jsonl(p)
    assert len(back) == 1 and back[0] == rec


def test_metrics_jsonl_malformed_names_line(tmp_path):
    p = tmp_path / "m.jsonl"
    p.write_text('{"ok": 1}\nnot json\n')
    with pytest.raises(ValueError, match=":2"):
        read_jsonl(p)


# -- aggregation / report -------------------------------------------------------------

def _records():
    recs = []
    for i in range(5):
        recs.append(RunMetrics(
            success=i < 3, status="goal_reached" if i < 3 else "budget_exhausted_partial",
            wall_time=0.1 * (i + 1), solution_cost=1.0 + i if i < 3 else None,
            expansions=10, evaluations=100 * (i + 1), planner="pachs",
            instance=f"i{i}", seed=i,
        ))
    return recs


def test_aggregate_success_rate_fixture():
    rows = aggregate(_records())
    assert len(rows) == 1
    row = rows[0]
    assert row["success_rate"] == pytest.approx(0.6)  # 3 of 5
    assert row["successes"] == 3 and row["runs"] == 5


def test_aggregate_cost_excludes_failures():
    recs = _records()
    base = aggregate(recs)[0]["cost_mean"]
    # injecting one more failed run must not change the cost mean
    recs.append(RunMetrics(success=False, status="error", planner="pachs",
                           instance="x", seed=9))
    assert aggregate(recs)[0]["cost_mean"] == pytest.approx(base)


def test_aggregate_idempotent_and_empty():
    assert aggregate([]) == []
    r1 = aggregate(_records())
    r2 = aggregate(_records())
    assert r1 == r2


def test_curve_points_non_decreasing():
    pts = curve_points(_records())["pachs"]
    assert [e for e, _ in pts] == sorted(e for e, _ in pts)
    fracs = [f for _, f in pts]
    assert fracs == sorted(fracs)
    assert fracs[-1] == pytest.approx(0.6)
    assert solved_fraction_at(_records(), "pachs", 150) == pytest.approx(0.2)
    assert solved_fraction_at(_records(), "pachs", 10_000) == pytest.approx(0.6)


def test_write_report_outputs(tmp_path):
    out = write_report(_records(), tmp_path)
    assert (tmp_path / "summary.csv").exists()
    assert (tmp_path / "curve.csv").exists()
    assert (tmp_path / "success_rate.png").stat().st_size > 0
    assert (tmp_path / "success_vs_evaluations.png").stat().st_size > 0
    assert out["rows"][0]["successes"] == 3


def test_report_pure_function_of_input(tmp_path):
    write_report(_records(), tmp_path / "a")
    write_report(_records(), tmp_path / "b")
    assert (tmp_path / "a" / "summary.csv").read_bytes() == (tmp_path / "b" / "summary.csv").read_bytes()
    assert (tmp_path / "a" / "curve.csv").read_bytes() == (tmp_path / "b" / "curve.csv").read_bytes()


# -- closed loop -------------------------------------------------------------------

def test_closed_loop_degenerate_equals_open_loop(cfg, nav_instance):
    open_loop = run_planner(nav_instance, "pachs", cfg, seed=0)
    assert open_loop.metrics.success
    cl = ClosedLoopConfig(eval_budget=int(cfg["eval_budget"]),
                          horizon=len(open_loop.path.actions) + 5, max_replans=30)
    rec = closed_loop(nav_instance, "pachs", cfg, cl, seed=0)
    assert rec.success
    assert rec.replans == 1
    assert rec.executed_cost == pytest.approx(open_loop.path.total_cost, abs=1e-9)


def test_closed_loop_horizon_cap(cfg, nav_instance):
    cl = ClosedLoopConfig(eval_budget=64, horizon=2, max_replans=1)
    rec = closed_loop(nav_instance, "pachs", cfg, cl, seed=0)
    # at most H actions executed under a single replan
    assert rec.replans <= 1
    assert rec.executed_cost <= 2 * load_config()["nav_max_action_norm"] + 1e-9


def test_closed_loop_total_action_cap(cfg):
    inst = generate_instance("pusht_fixed", 2, cfg)
    cl = ClosedLoopConfig(eval_budget=300, horizon=3, max_replans=4)
    rec = closed_loop(inst, "parallel-rollout", cfg, cl, seed=1)
    max_cost_per_action = cfg["pusht_max_action_norm"] * (1 + cfg["pusht_cost_floor_factor"])
    assert rec.executed_cost <= cl.horizon * cl.max_replans * max_cost_per_action + 1e-9


def test_closed_loop_single_rollout_direct(cfg, nav_instance):
    rec = closed_loop(nav_instance, "single-rollout", cfg,
                      ClosedLoopConfig(eval_budget=500, horizon=10, max_replans=30), seed=0)
    assert rec.replans == 0
    assert rec.evaluations <= 10 * 30


def test_closed_loop_no_sim_gap(cfg, nav_instance):
    """World and planning environments are the same deterministic analog, so
    the first planned path replays in the world state-for-state."""
    plan = run_planner(nav_instance, "pachs", cfg, seed=4)
    assert plan.metrics.success
    world = build_problem(nav_instance).env
    s = build_problem(nav_instance).start
    for i, a in enumerate(plan.path.actions):
        s, c, valid = world.evaluate(s, a)
        assert valid
        assert np.array_equal(s, plan.path.states[i + 1])


# -- CLI ------------------------------------------------------------------------------

def test_cli_gen_plan_bench_report(tmp_path):
    runner = CliRunner()
    inst_dir = tmp_path / "inst"
    r = runner.invoke(main, ["gen-instances", "--task", "nav_shelf", "--count", "2",
                             "--seed", "0", "--out", str(inst_dir)])
    assert r.exit_code == 0, r.output
    files = sorted(inst_dir.glob("*.inst"))
    assert len(files) == 2

    # byte-identical regeneration
    inst_dir2 = tmp_path / "inst2"
    runner.invoke(main, ["gen-instances", "--task", "nav_shelf", "--count", "2",
                         "--seed", "0", "--out", str(inst_dir2)])
    for a, b in zip(files, sorted(inst_dir2.glob("*.inst"))):
        assert a.read_bytes() == b.read_bytes()

    out = tmp_path / "run"
    r = runner.invoke(main, ["plan", "--instance", str(files[0]), "--planner", "pachs",
                             "--seed", "1", "--out", str(out)])
    assert r.exit_code == 0, r.output
    rec = json.loads(r.output.strip().splitlines()[-1])
    assert rec["success"] is True
    assert list(out.glob("*.path"))

    sweep = tmp_path / "sweep"
    r = runner.invoke(main, ["bench", "--instances", str(inst_dir),
                             "--planners", "pachs,single-rollout", "--reps", "2",
                             "--budget", "20000", "--seed", "0", "--out", str(sweep)])
    assert r.exit_code == 0, r.output
    records = read_jsonl(sweep / "metrics.jsonl")
    assert len(records) == 2 * 2 * 2
    # independent recount of the success rates against the CSV
    import csv
    with open(sweep / "summary.csv") as fh:
        rows = {row["planner"]: row for row in csv.DictReader(fh)}
    for planner in ("pachs", "single-rollout"):
        mine = [m for m in records if m.planner == planner]
        want = sum(1 for m in mine if m.success) / len(mine)
        assert float(rows[planner]["success_rate"]) == pytest.approx(want)
    assert (sweep / "success_rate.png").exists()

    rpt = tmp_path / "rpt"
    r = runner.invoke(main, ["report", "--metrics", str(sweep / "metrics.jsonl"),
                             "--out", str(rpt)])
    assert r.exit_code == 0, r.output
    assert (rpt / "summary.csv").read_bytes() == (sweep / "summary.csv").read_bytes()


def test_cli_closed_loop_and_config(tmp_path):
    runner = CliRunner()
    inst_dir = tmp_path / "inst"
    runner.invoke(main, ["gen-instances", "--task", "nav_shelf", "--count", "1",
                         "--seed", "3", "--out", str(inst_dir)])
    inst = next(inst_dir.glob("*.inst"))
    out = tmp_path / "cl"
    r = runner.invoke(main, ["closed-loop", "--instance", str(inst), "--planner", "pachs",
                             "--budget", "1000", "--horizon", "5", "--replans", "10",
                             "--out", str(out)])
    assert r.exit_code == 0, r.output
    rec = json.loads(r.output.strip().splitlines()[-1])
    assert rec["replans"] <= 10

    cfg_path = tmp_path / "my.cfg"
    r = runner.invoke(main, ["write-config", "--out", str(cfg_path)])
    assert r.exit_code == 0
    assert load_config(cfg_path) == dict(DEFAULTS)


def test_cli_report_empty_input(tmp_path):
    runner = CliRunner()
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    r = runner.invoke(main, ["report", "--metrics", str(empty), "--out", str(tmp_path / "o")])
    assert r.exit_code == 0
    assert (tmp_path / "o" / "summary.csv").read_text().strip().startswith("planner")


def test_cli_report_malformed_line(tmp_path):
    runner = CliRunner()
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"planner": "x"}\n{oops\n')
    r = runner.invoke(main, ["report", "--metrics", str(bad), "--out", str(tmp_path / "o")])
    assert r.exit_code != 0
    assert ":2" in r.output

"""Benchmark harness: one-shot planning runs, path persistence + replay
validation, open-loop sweeps, and the closed-loop plan-execute-observe
protocol against a separate "world" environment.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from pathlib import Path as FsPath

import numpy as np

from .baselines import (
    BeamConfig,
    EpaseStylePlanner,
    RolloutConfig,
    beam_search,
    compass_actions,
    parallel_rollout,
    single_rollout,
)
from .envs import (
    GridDistanceField,
    Instance,
    build_problem,
    lattice_resolution,
)
from .graph import InternalFaultError, Path
from .metrics import PlanStatus, RunMetrics
from .models import ModelPair, surrogate_nav, surrogate_pusht
from .search import PachsPlanner, PlannerConfig, PlanResult

PLANNERS = ("pachs", "single-rollout", "parallel-rollout", "beam", "epase")


def build_models(inst: Instance) -> ModelPair:
    """Surrogate actor/critic pair frozen into the instance's constants."""
    p = inst.params
    if inst.task == "nav_shelf":
        return surrogate_nav(
            goal=np.array(inst.vectors["goal"]),
            sigma=p["sigma"],
            max_action_norm=p["max_action_norm"],
        )
    problem = build_problem(inst)
    env = problem.env
    t = env.table
    return surrogate_pusht(
        goal_pose=tuple(inst.vectors["goal_pose"]),
        parts=env.shape.parts,
        w_pos=p["w_pos"],
        w_ang=p["w_ang"],
        w_reach=p["w_reach"],
        contact_radius=p["pusher_radius"],
        sigma=p["sigma"],
        max_action_norm=p["max_action_norm"],
        workspace=(t.xmin, t.ymin, t.xmax, t.ymax),
    )


def planner_config(inst: Instance, cfg: dict, seed: int,
                   eval_budget: int | None = None,
                   time_budget: float | None = None) -> PlannerConfig:
    if eval_budget is None:
        eval_budget = int(cfg["eval_budget"]) or None
    if time_budget is None:
        time_budget = float(cfg["time_budget"]) or None
    return PlannerConfig(
        w=float(cfg["w"]),
        num_workers=int(cfg["workers"]),
        batch_size=int(cfg["batch_size"]),
        resolution=lattice_resolution(inst),
        eval_budget=eval_budget,
        time_budget=time_budget,
        rng_seed=seed,
    )


def run_planner(inst: Instance, planner: str, cfg: dict, seed: int,
                start: np.ndarray | None = None,
                eval_budget: int | None = None,
                time_budget: float | None = None) -> PlanResult:
    """Run one planner on one instance (optionally from an override start)."""
    if planner not in PLANNERS:
        raise ValueError(f"unknown planner {planner!r}; expected one of {PLANNERS}")
    problem = build_problem(inst)
    s0 = problem.start if start is None else np.asarray(start, dtype=float)
    budget = eval_budget if eval_budget is not None else (int(cfg["eval_budget"]) or None)

    if planner == "pachs":
        models = build_models(inst)
        p = PachsPlanner(problem.env, s0, models,
                         planner_config(inst, cfg, seed, eval_budget, time_budget))
        result = p.plan()
    elif planner == "epase":
        if inst.task != "nav_shelf":
            raise ValueError("epase baseline needs the grid heuristic (nav_shelf only)")
        field = GridDistanceField(problem.env, inst.params["heuristic_cell"])
        actions = compass_actions(inst.params["resolution"])
        p = EpaseStylePlanner(
            problem.env, s0, field.query,
            planner_config(inst, cfg, seed, eval_budget, time_budget), actions,
        )
        result = p.plan()
    elif planner == "beam":
        models = build_models(inst)
        bc = BeamConfig(
            width=int(cfg["beam_width"]),
            samples=int(cfg["beam_samples"]),
            max_layers=int(cfg["beam_layers"]),
            eval_budget=budget if budget is not None else 10**9,
            rng_seed=seed,
        )
        result = beam_search(problem.env, s0, models, bc, lattice_resolution(inst))
    else:
        models = build_models(inst)
        rc = RolloutConfig(
            max_steps=int(cfg["rollout_max_steps"]),
            batch=int(cfg["rollout_batch"]),
            eval_budget=budget if budget is not None else 10**9,
            rng_seed=seed,
        )
        fn = single_rollout if planner == "single-rollout" else parallel_rollout
        result = fn(problem.env, s0, models, rc)
    result.metrics.planner = planner
    result.metrics.instance = inst.name
    result.metrics.seed = seed
    return result


# ---------------------------------------------------------------------------
# Path files + replay validation
# ---------------------------------------------------------------------------

def _fmt(v: float) -> str:
    return f"{v:.17g}"


def save_path(path: Path, out_path: str | FsPath) -> None:
    lines = [
        "pachs-path 1",
        f"total_cost {_fmt(path.total_cost)}",
        f"complete {int(path.complete)}",
    ]
    for i, s in enumerate(path.states):
        lines.append("state " + " ".join(_fmt(float(v)) for v in s))
        if i < len(path.actions):
            lines.append("action " + " ".join(_fmt(float(v)) for v in path.actions[i]))
            lines.append(f"cost {_fmt(path.costs[i])}")
    FsPath(out_path).write_text("\n".join(lines) + "\n")


def load_path(in_path: str | FsPath) -> Path:
    lines = FsPath(in_path).read_text().splitlines()
    if not lines or lines[0].strip() != "pachs-path 1":
        raise ValueError(f"{in_path}: not a path file")
    path = Path()
    for raw in lines[1:]:
        parts = raw.split()
        if not parts:
            continue
        tag = parts[0]
        if tag == "total_cost":
            path.total_cost = float(parts[1])
        elif tag == "complete":
            path.complete = bool(int(parts[1]))
        elif tag == "state":
            path.states.append(np.array([float(v) for v in parts[1:]]))
        elif tag == "action":
            path.actions.append(np.array([float(v) for v in parts[1:]]))
        elif tag == "cost":
            path.costs.append(float(parts[1]))
        else:
            raise ValueError(f"{in_path}: unknown tag {tag!r}")
    return path


def replay_path(inst: Instance, path: Path) -> float:
    """Re-run every transition through a fresh environment.

    Raises InternalFaultError on any invalid transition, on a successor
    landing outside the recorded state's lattice cell, or on a cost
    mismatch. Returns the replayed total cost.
    """
    problem = build_problem(inst)
    env = problem.env
    res = lattice_resolution(inst)
    total = 0.0
    for i, a in enumerate(path.actions):
        s = path.states[i]
        s2, c, valid = env.evaluate(s, a)
        if not valid:
            raise InternalFaultError(f"replay step {i}: transition invalid")
        rec = path.states[i + 1]
        for d in range(len(res)):
            da = s2[d] - rec[d]
            if d in env.angular_dims:
                da = math.atan2(math.sin(da), math.cos(da))
            if abs(da) > res[d]:
                raise InternalFaultError(
                    f"replay step {i}: successor strays {abs(da):.3g} in dim {d}"
                )
        if abs(c - path.costs[i]) > 1e-9:
            raise InternalFaultError(f"replay step {i}: cost mismatch")
        total += c
    if abs(total - path.total_cost) > 1e-9:
        raise InternalFaultError("replay total cost mismatch")
    return total


# ---------------------------------------------------------------------------
# Closed loop
# ---------------------------------------------------------------------------

@dataclass
class ClosedLoopConfig:
    eval_budget: int = 2000
    time_budget: float | None = None   # set to use wall-clock query budgets
    horizon: int = 10
    max_replans: int = 30

    def __post_init__(self):
        if self.horizon < 1 or self.max_replans < 1:
            raise ValueError("horizon and max_replans must be >= 1")


def closed_loop(inst: Instance, planner: str, cfg: dict, cl: ClosedLoopConfig,
                seed: int) -> RunMetrics:
    """Plan-execute-observe loop against an independent world environment."""
    t0 = time.perf_counter()
    world_problem = build_problem(inst)
    world = world_problem.env
    s = world_problem.start
    metrics = RunMetrics(planner=planner, instance=inst.name, seed=seed, replans=0,
                         executed_cost=0.0)

    if planner == "single-rollout":
        # Direct execution in the world, capped at the same action budget.
        models = build_models(inst)
        rc = RolloutConfig(
            max_steps=min(int(cfg["rollout_max_steps"]), cl.horizon * cl.max_replans),
            batch=1,
            eval_budget=max(int(cfg["eval_budget"]),
                            cl.horizon * cl.max_replans),
            rng_seed=seed,
        )
        result = single_rollout(world, s, models, rc)
        metrics.success = result.status is PlanStatus.GOAL_REACHED
        metrics.status = result.status.value
        metrics.evaluations = result.metrics.evaluations
        metrics.expansions = result.metrics.expansions
        metrics.executed_cost = result.path.total_cost
        metrics.solution_cost = result.path.total_cost if metrics.success else None
        metrics.wall_time = time.perf_counter() - t0
        return metrics

    executed_actions = 0
    success = False
    for r in range(cl.max_replans):
        if world.goal_satisfied(s):
            success = True
            break
        result = run_planner(
            inst, planner, cfg, seed + r, start=s,
            eval_budget=None if cl.time_budget else cl.eval_budget,
            time_budget=cl.time_budget,
        )
        metrics.replans += 1
        metrics.evaluations += result.metrics.evaluations
        metrics.expansions += result.metrics.expansions
        if result.status is PlanStatus.OPEN_EXHAUSTED_NO_SOLUTION or not result.path.actions:
            metrics.status = "closed_loop_no_progress"
            break
        for a in result.path.actions[: cl.horizon]:
            s2, c, valid = world.evaluate(s, a)
            if not valid:
                break
            s = s2
            metrics.executed_cost += c
            executed_actions += 1
            if world.goal_satisfied(s):
                success = True
                break
        if success:
            break
    else:
        if world.goal_satisfied(s):
            success = True
    metrics.success = success
    if success:
        metrics.status = PlanStatus.GOAL_REACHED.value
        metrics.solution_cost = metrics.executed_cost
    elif not metrics.status:
        metrics.status = "closed_loop_replan_cap"
    metrics.wall_time = time.perf_counter() - t0
    return metrics

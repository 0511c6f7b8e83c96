"""Seeded problem-instance generation and text serialization.

Tasks:
  nav_shelf   fixed shelf-like obstacle layout, random reachable goal
  pusht_fixed random valid initial T pose, fixed goal pose
  pusht_rand  random initial and goal T poses
  pusht_obs   pusht_fixed plus a fixed two-block obstacle layout whose gap
              is wider than the T bar

Instance files are self-contained: all environment constants in force at
generation time are frozen into the file, so replays never depend on the
current config.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..geometry import Rect, wrap_angle
from .base import Problem
from .heuristic import GridDistanceField
from .nav2d import Nav2DWorld
from .pusht import PushT2DWorld, TShape, coverage

TASKS = ("nav_shelf", "pusht_fixed", "pusht_rand", "pusht_obs")

MAX_REJECTION_TRIES = 10_000

# Fixed shelf layout: two wall columns with door gaps.
SHELF_OBSTACLES = [
    Rect(0.30, 0.00, 0.36, 0.42),
    Rect(0.30, 0.58, 0.36, 1.00),
    Rect(0.62, 0.00, 0.68, 0.18),
    Rect(0.62, 0.34, 0.68, 0.66),
    Rect(0.62, 0.82, 0.68, 1.00),
]
NAV_BOUNDS = Rect(0.0, 0.0, 1.0, 1.0)
NAV_START = (0.1125, 0.5125)

PUSHT_TABLE = Rect(0.0, 0.0, 1.0, 1.0)
PUSHT_GOAL_POSE = (0.50, 0.72, 0.0)
PUSHT_PUSHER_START = (0.50, 0.06)
# Two blocks with an off-center gap 1.5x the bar width; the goal sits above
# the wide block so the straight push from most starts jams against it.
PUSHT_OBS_BLOCKS = [
    Rect(0.00, 0.42, 0.16, 0.54),
    Rect(0.52, 0.42, 1.00, 0.54),
]
PUSHT_OBS_GOAL_POSE = (0.64, 0.76, 0.0)


class GenerationError(RuntimeError):
    """Rejection sampling exceeded its try limit."""


@dataclass
class Instance:
    task: str
    seed: int
    params: dict[str, float] = field(default_factory=dict)
    rects: dict[str, list[Rect]] = field(default_factory=dict)
    vectors: dict[str, list[float]] = field(default_factory=dict)

    @property
    def name(self) -> str:
        return f"{self.task}-{self.seed:05d}"


def generate_instance(task: str, seed: int, cfg: dict) -> Instance:
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}; expected one of {TASKS}")
    rng = np.random.default_rng(seed)
    if task == "nav_shelf":
        return _gen_nav_shelf(seed, rng, cfg)
    return _gen_pusht(task, seed, rng, cfg)


def _gen_nav_shelf(seed: int, rng: np.random.Generator, cfg: dict) -> Instance:
    world = _nav_world(goal=(0.5, 0.5), cfg=cfg)
    field_from_start = None
    for _ in range(MAX_REJECTION_TRIES):
        gx = rng.uniform(NAV_BOUNDS.xmin + 0.05, NAV_BOUNDS.xmax - 0.05)
        gy = rng.uniform(NAV_BOUNDS.ymin + 0.05, NAV_BOUNDS.ymax - 0.05)
        if not world.valid_state(np.array([gx, gy])):
            continue
        if math.hypot(gx - NAV_START[0], gy - NAV_START[1]) < 4 * cfg["nav_goal_radius"]:
            continue
        if field_from_start is None:
            probe = _nav_world(goal=NAV_START, cfg=cfg)
            field_from_start = GridDistanceField(probe, cfg["nav_heuristic_cell"])
        if not field_from_start.reachable(np.array([gx, gy])):
            continue
        inst = Instance("nav_shelf", seed)
        inst.params = {
            "max_action_norm": cfg["nav_max_action_norm"],
            "goal_radius": cfg["nav_goal_radius"],
            "resolution": cfg["nav_resolution"],
            "sigma": cfg["nav_sigma"],
            "heuristic_cell": cfg["nav_heuristic_cell"],
        }
        inst.rects = {"bounds": [NAV_BOUNDS], "obstacle": list(SHELF_OBSTACLES)}
        inst.vectors = {"start": list(NAV_START), "goal": [gx, gy]}
        return inst
    raise GenerationError(f"nav_shelf seed {seed}: no reachable goal found")


def _nav_world(goal, cfg: dict) -> Nav2DWorld:
    return Nav2DWorld(
        bounds=NAV_BOUNDS,
        obstacles=SHELF_OBSTACLES,
        goal_center=np.asarray(goal, dtype=float),
        goal_radius=cfg["nav_goal_radius"],
        max_action_norm=cfg["nav_max_action_norm"],
        resolution=cfg["nav_resolution"],
    )


def _gen_pusht(task: str, seed: int, rng: np.random.Generator, cfg: dict) -> Instance:
    shape = TShape(cfg["pusht_bar_w"], cfg["pusht_bar_h"], cfg["pusht_stem_w"], cfg["pusht_stem_h"])
    obstacles = list(PUSHT_OBS_BLOCKS) if task == "pusht_obs" else []
    margin = shape.radius + 0.02

    def sample_pose(y_lo: float, y_hi: float, theta_center: float, theta_band: float):
        x = rng.uniform(PUSHT_TABLE.xmin + margin, PUSHT_TABLE.xmax - margin)
        y = rng.uniform(max(y_lo, PUSHT_TABLE.ymin + margin), min(y_hi, PUSHT_TABLE.ymax - margin))
        th = wrap_angle(theta_center + rng.uniform(-theta_band, theta_band))
        return (x, y, th)

    goal_pose = PUSHT_OBS_GOAL_POSE if task == "pusht_obs" else PUSHT_GOAL_POSE
    world_probe = _pusht_world({}, shape, goal_pose, obstacles, cfg)
    for _ in range(MAX_REJECTION_TRIES):
        if task == "pusht_rand":
            goal_pose = sample_pose(0.55, 0.90, 0.0, math.pi)
        start_pose = sample_pose(0.12, 0.34, goal_pose[2], 0.30 if task != "pusht_rand" else 0.50)
        state = np.array([*PUSHT_PUSHER_START, *start_pose])
        probe = (
            world_probe
            if task != "pusht_rand"
            else _pusht_world({}, shape, goal_pose, obstacles, cfg)
        )
        if not probe.valid_state(state):
            continue
        if coverage(start_pose, goal_pose, shape) >= cfg["pusht_goal_coverage"]:
            continue
        inst = Instance(task, seed)
        inst.params = {
            "bar_w": cfg["pusht_bar_w"],
            "bar_h": cfg["pusht_bar_h"],
            "stem_w": cfg["pusht_stem_w"],
            "stem_h": cfg["pusht_stem_h"],
            "pusher_radius": cfg["pusht_pusher_radius"],
            "kappa_t": cfg["pusht_kappa_t"],
            "kappa_r": cfg["pusht_kappa_r"],
            "substep": cfg["pusht_substep"],
            "max_action_norm": cfg["pusht_max_action_norm"],
            "cost_floor": cfg["pusht_cost_floor_factor"] * cfg["pusht_max_action_norm"],
            "pusher_resolution": cfg["pusht_pusher_resolution"],
            "obj_resolution": cfg["pusht_obj_resolution"],
            "theta_resolution": cfg["pusht_theta_resolution"],
            "goal_coverage": cfg["pusht_goal_coverage"],
            "sigma": cfg["pusht_sigma"],
            "w_pos": cfg["pusht_w_pos"],
            "w_ang": cfg["pusht_w_ang"],
            "w_reach": cfg["pusht_w_reach"],
        }
        inst.rects = {"bounds": [PUSHT_TABLE], "obstacle": obstacles}
        inst.vectors = {
            "start": [float(v) for v in state],
            "goal_pose": [float(v) for v in goal_pose],
        }
        return inst
    raise GenerationError(f"{task} seed {seed}: no valid initial pose found")


def _pusht_world(params: dict, shape: TShape, goal_pose, obstacles, cfg: dict) -> PushT2DWorld:
    get = lambda key, ckey: params.get(key, cfg[ckey])
    return PushT2DWorld(
        table=PUSHT_TABLE,
        shape=shape,
        pusher_radius=get("pusher_radius", "pusht_pusher_radius"),
        goal_pose=goal_pose,
        obstacles=obstacles,
        kappa_t=get("kappa_t", "pusht_kappa_t"),
        kappa_r=get("kappa_r", "pusht_kappa_r"),
        substep=get("substep", "pusht_substep"),
        max_action_norm=get("max_action_norm", "pusht_max_action_norm"),
        cost_floor=params.get(
            "cost_floor", cfg["pusht_cost_floor_factor"] * cfg["pusht_max_action_norm"]
        ),
        pos_resolution=get("obj_resolution", "pusht_obj_resolution"),
        theta_resolution=get("theta_resolution", "pusht_theta_resolution"),
        goal_coverage=get("goal_coverage", "pusht_goal_coverage"),
    )


# ---------------------------------------------------------------------------
# Building runnable problems from instances
# ---------------------------------------------------------------------------

def build_problem(inst: Instance) -> Problem:
    if inst.task == "nav_shelf":
        p = inst.params
        env = Nav2DWorld(
            bounds=inst.rects["bounds"][0],
            obstacles=inst.rects.get("obstacle", []),
            goal_center=np.array(inst.vectors["goal"]),
            goal_radius=p["goal_radius"],
            max_action_norm=p["max_action_norm"],
            resolution=p["resolution"],
        )
        return Problem(env, np.array(inst.vectors["start"]))
    p = inst.params
    shape = TShape(p["bar_w"], p["bar_h"], p["stem_w"], p["stem_h"])
    env = PushT2DWorld(
        table=inst.rects["bounds"][0],
        shape=shape,
        pusher_radius=p["pusher_radius"],
        goal_pose=tuple(inst.vectors["goal_pose"]),
        obstacles=inst.rects.get("obstacle", []),
        kappa_t=p["kappa_t"],
        kappa_r=p["kappa_r"],
        substep=p["substep"],
        max_action_norm=p["max_action_norm"],
        cost_floor=p["cost_floor"],
        pos_resolution=p["obj_resolution"],
        theta_resolution=p["theta_resolution"],
        goal_coverage=p["goal_coverage"],
    )
    return Problem(env, np.array(inst.vectors["start"]))


def lattice_resolution(inst: Instance) -> np.ndarray:
    """Lattice vector frozen into the instance (pusher res may differ)."""
    p = inst.params
    if inst.task == "nav_shelf":
        return np.array([p["resolution"], p["resolution"]])
    pr, orr, tr = p["pusher_resolution"], p["obj_resolution"], p["theta_resolution"]
    return np.array([pr, pr, orr, orr, tr])


# ---------------------------------------------------------------------------
# Serialization (field-per-line text format, 17 significant digits)
# ---------------------------------------------------------------------------

def _fmt(v: float) -> str:
    return f"{v:.17g}"


def save_instance(inst: Instance, path: str | Path) -> None:
    lines = ["pachs-instance 1", f"task {inst.task}", f"seed {inst.seed}"]
    for key in sorted(inst.params):
        lines.append(f"param {key} {_fmt(inst.params[key])}")
    for key in sorted(inst.rects):
        for r in inst.rects[key]:
            lines.append(f"rect {key} {_fmt(r.xmin)} {_fmt(r.ymin)} {_fmt(r.xmax)} {_fmt(r.ymax)}")
    for key in sorted(inst.vectors):
        lines.append(f"vec {key} " + " ".join(_fmt(v) for v in inst.vectors[key]))
    Path(path).write_text("\n".join(lines) + "\n")


def load_instance(path: str | Path) -> Instance:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() != "pachs-instance 1":
        raise ValueError(f"{path}: not an instance file")
    inst = Instance("", -1)
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        tag = parts[0]
        try:
            if tag == "task":
                inst.task = parts[1]
            elif tag == "seed":
                inst.seed = int(parts[1])
            elif tag == "param":
                inst.params[parts[1]] = float(parts[2])
            elif tag == "rect":
                inst.rects.setdefault(parts[1], []).append(
                    Rect(*(float(v) for v in parts[2:6]))
                )
            elif tag == "vec":
                inst.vectors[parts[1]] = [float(v) for v in parts[2:]]
            else:
                raise ValueError(f"unknown tag {tag!r}")
        except (IndexError, ValueError) as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from exc
    if inst.task not in TASKS or inst.seed < 0:
        raise ValueError(f"{path}: incomplete instance header")
    return inst

"""Experiment configuration: defaults plus a flat text config format.

A config file is `key value` lines (blank lines and # comments allowed).
Every tunable constant of the planners, environments, and harness lives
here; configs/default.cfg in the repo is generated from DEFAULTS and the
test suite keeps them in sync.
"""

from __future__ import annotations

from pathlib import Path

DEFAULTS: dict[str, float | int] = {
    # planner core
    "w": 6.0,
    "workers": 1,
    "batch_size": 8,
    "rng_seed": 0,
    "eval_budget": 50000,
    "time_budget": 0.0,          # seconds; 0 disables
    # nav2d (shelf analog)
    "nav_resolution": 0.025,
    "nav_max_action_norm": 0.05,
    "nav_goal_radius": 0.05,     # 2x lattice resolution
    "nav_sigma": 0.03,
    "nav_heuristic_cell": 0.025,
    # push-T analog
    "pusht_bar_w": 0.24,
    "pusht_bar_h": 0.06,
    "pusht_stem_w": 0.06,
    "pusht_stem_h": 0.18,
    "pusht_pusher_radius": 0.025,
    "pusht_kappa_t": 1.0,
    "pusht_kappa_r": 6.0,        # rad per m^2 of penetration*lever
    "pusht_substep": 0.005,
    "pusht_max_action_norm": 0.06,
    "pusht_cost_floor_factor": 0.01,   # cost floor = factor * max_action_norm
    "pusht_pusher_resolution": 0.05,
    "pusht_obj_resolution": 0.01,
    "pusht_theta_resolution": 0.05,
    "pusht_goal_coverage": 0.9,
    "pusht_sigma": 0.025,
    "pusht_w_pos": 1.0,
    "pusht_w_ang": 0.8,
    "pusht_w_reach": 0.5,
    # rollout baselines
    "rollout_max_steps": 300,
    "rollout_batch": 16,
    # beam baseline
    "beam_width": 16,
    "beam_samples": 8,
    "beam_layers": 400,
    # closed loop
    "cl_eval_budget": 2000,
    "cl_time_budget": 0.0,       # seconds; 0 selects the evaluation budget
    "cl_horizon": 10,
    "cl_max_replans": 30,
    # bench
    "bench_reps": 5,
}

_INT_KEYS = {
    "workers", "batch_size", "rng_seed", "eval_budget",
    "rollout_max_steps", "rollout_batch",
    "beam_width", "beam_samples", "beam_layers",
    "cl_eval_budget", "cl_horizon", "cl_max_replans", "bench_reps",
}


def load_config(path: str | Path | None = None) -> dict:
    """Defaults, optionally overridden by a config file."""
    cfg = dict(DEFAULTS)
    if path is None:
        return cfg
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'key value', got {raw!r}")
        key, value = parts
        if key not in DEFAULTS:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
        cfg[key] = int(value) if key in _INT_KEYS else float(value)
    return cfg


def write_config(cfg: dict, path: str | Path) -> None:
    lines = [f"{k} {cfg[k]}" for k in DEFAULTS]
    Path(path).write_text("\n".join(lines) + "\n")

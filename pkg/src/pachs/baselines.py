"""Comparison planners on the same environment/model substrate.

  single_rollout    observe-act-step until goal, invalid step, or step cap
  parallel_rollout  batch of restarting rollouts under one evaluation budget
  beam_search       layer-synchronous beam keeping the W best successors
  EpaseStylePlanner the same edge-based engine but with state-based
                    heuristic priorities: every outgoing edge of s carries
                    g(s) + w * h(s), so siblings tie and pop together

All planners count one evaluation per environment evaluate call, so
budgets are directly comparable.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .envs.base import Environment
from .graph import Path, SearchNode
from .metrics import PlanStatus, RunMetrics
from .models import ModelPair, fixed_action_models, zero_cost_to_go
from .search import PachsPlanner, PlannerConfig, PlanResult, _Terminal


@dataclass
class RolloutConfig:
    # eval_budget is normally >= max_steps; smaller values just cut the
    # episode short (0 yields an immediate empty partial result).
    max_steps: int = 300
    batch: int = 16
    eval_budget: int = 50000
    rng_seed: int = 0


@dataclass
class BeamConfig:
    width: int = 16
    samples: int = 8
    max_layers: int = 400
    eval_budget: int = 50000
    rng_seed: int = 0

    def __post_init__(self):
        if self.width < 1 or self.samples < 1:
            raise ValueError("beam width and samples must be >= 1")


def compass_actions(step: float) -> np.ndarray:
    """Fixed 8-action probe set: axis and diagonal steps of one lattice cell."""
    return np.array(
        [
            (step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step),
            (step, step), (step, -step), (-step, step), (-step, -step),
        ]
    )


def _result(path: Path, status: PlanStatus, wall: float, expansions: int,
            evaluations: int, planner: str, seed: int) -> PlanResult:
    return PlanResult(
        path=path,
        status=status,
        metrics=RunMetrics(
            success=status is PlanStatus.GOAL_REACHED,
            status=status.value,
            wall_time=wall,
            solution_cost=path.total_cost if status is PlanStatus.GOAL_REACHED else None,
            expansions=expansions,
            evaluations=evaluations,
            planner=planner,
            seed=seed,
        ),
    )


# ---------------------------------------------------------------------------
# Rollouts
# ---------------------------------------------------------------------------

class _Episode:
    __slots__ = ("state", "states", "actions", "costs", "steps")

    def __init__(self, start: np.ndarray):
        self.reset(start)

    def reset(self, start: np.ndarray):
        self.state = start
        self.states = [start]
        self.actions: list[np.ndarray] = []
        self.costs: list[float] = []
        self.steps = 0

    def advance(self, a: np.ndarray, s2: np.ndarray, c: float):
        self.state = s2
        self.states.append(s2)
        self.actions.append(a)
        self.costs.append(c)
        self.steps += 1

    def path(self, complete: bool) -> Path:
        return Path(
            states=list(self.states),
            actions=list(self.actions),
            costs=list(self.costs),
            total_cost=sum(self.costs),
            complete=complete,
        )


def single_rollout(env: Environment, start: np.ndarray, models: ModelPair,
                   cfg: RolloutConfig) -> PlanResult:
    """One observe-act-step episode; stops on goal, invalid step, or cap."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(cfg.rng_seed)
    ep = _Episode(np.asarray(start, dtype=float))
    evals = expansions = 0
    status = PlanStatus.BUDGET_EXHAUSTED_PARTIAL
    while True:
        if env.goal_satisfied(ep.state):
            status = PlanStatus.GOAL_REACHED
            break
        if ep.steps >= cfg.max_steps or evals >= cfg.eval_budget:
            break
        a = np.asarray(models.sample_actions(ep.state, 1, rng))[0]
        expansions += 1
        s2, c, valid = env.evaluate(ep.state, a)
        evals += 1
        if not valid:
            break
        ep.advance(a, s2, c)
    wall = time.perf_counter() - t0
    path = ep.path(complete=status is PlanStatus.GOAL_REACHED)
    return _result(path, status, wall, expansions, evals, "single-rollout", cfg.rng_seed)


def parallel_rollout(env: Environment, start: np.ndarray, models: ModelPair,
                     cfg: RolloutConfig) -> PlanResult:
    """Batch of episodes stepped in lock-step under one evaluation budget.

    An episode restarts immediately on an invalid transition or at the step
    cap. If the budget runs out, the best prefix seen wins, scored by the
    critic's cost-to-go at the prefix terminal state (lower is better).
    """
    t0 = time.perf_counter()
    start = np.asarray(start, dtype=float)
    zero_a = np.zeros((1, models.action_dim))

    def terminal_score(state: np.ndarray) -> float:
        return float(models.cost_to_go(state, zero_a)[0])

    if env.goal_satisfied(start):
        path = Path(states=[start], actions=[], costs=[], total_cost=0.0, complete=True)
        return _result(path, PlanStatus.GOAL_REACHED, time.perf_counter() - t0,
                       0, 0, "parallel-rollout", cfg.rng_seed)

    episodes = [_Episode(start) for _ in range(cfg.batch)]
    rngs = [np.random.default_rng(cfg.rng_seed ^ i) for i in range(cfg.batch)]
    evals = expansions = 0
    best_path: Path | None = None
    best_score = math.inf

    def consider(ep: _Episode):
        nonlocal best_path, best_score
        score = terminal_score(ep.state)
        if score < best_score:
            best_score = score
            best_path = ep.path(complete=False)

    winner: Path | None = None
    while winner is None and evals < cfg.eval_budget:
        for i, ep in enumerate(episodes):
            if evals >= cfg.eval_budget:
                break
            if ep.steps >= cfg.max_steps:
                consider(ep)
                ep.reset(start)
            a = np.asarray(models.sample_actions(ep.state, 1, rngs[i]))[0]
            expansions += 1
            s2, c, valid = env.evaluate(ep.state, a)
            evals += 1
            if not valid:
                consider(ep)
                ep.reset(start)
                continue
            ep.advance(a, s2, c)
            if env.goal_satisfied(s2):
                winner = ep.path(complete=True)
                break
    wall = time.perf_counter() - t0
    if winner is not None:
        return _result(winner, PlanStatus.GOAL_REACHED, wall, expansions, evals,
                       "parallel-rollout", cfg.rng_seed)
    for ep in episodes:
        consider(ep)
    path = best_path if best_path is not None else Path(states=[start])
    return _result(path, PlanStatus.BUDGET_EXHAUSTED_PARTIAL, wall, expansions, evals,
                   "parallel-rollout", cfg.rng_seed)


# ---------------------------------------------------------------------------
# Beam search
# ---------------------------------------------------------------------------

@dataclass
class _BeamEntry:
    score: float
    g: float
    states: list[np.ndarray]
    actions: list[np.ndarray]
    costs: list[float]

    def path(self, complete: bool) -> Path:
        return Path(states=self.states, actions=self.actions, costs=self.costs,
                    total_cost=sum(self.costs), complete=complete)


def beam_search(env: Environment, start: np.ndarray, models: ModelPair,
                cfg: BeamConfig, resolution: np.ndarray | None = None) -> PlanResult:
    """Layer-synchronous beam: sample K actions per frontier state, evaluate
    all W*K edges, rank successors by g(s) + q(s, a), keep the best W valid
    successors with distinct lattice cells.
    """
    t0 = time.perf_counter()
    start = np.asarray(start, dtype=float)
    res = resolution if resolution is not None else env.default_resolution()
    cell_of = _cell_fn(res, env.angular_dims)
    rng = np.random.default_rng(cfg.rng_seed)
    evals = expansions = 0

    if env.goal_satisfied(start):
        path = Path(states=[start], complete=True)
        return _result(path, PlanStatus.GOAL_REACHED, time.perf_counter() - t0,
                       0, 0, "beam", cfg.rng_seed)

    frontier = [_BeamEntry(0.0, 0.0, [start], [], [])]
    status = PlanStatus.BUDGET_EXHAUSTED_PARTIAL
    goal_entry: _BeamEntry | None = None
    for _layer in range(cfg.max_layers):
        if evals >= cfg.eval_budget:
            break
        candidates: dict[tuple, _BeamEntry] = {}
        for entry in frontier:
            actions = np.asarray(models.sample_actions(entry.states[-1], cfg.samples, rng))
            qs = np.asarray(models.cost_to_go(entry.states[-1], actions))
            expansions += 1
            for i in range(cfg.samples):
                if evals >= cfg.eval_budget:
                    break
                s2, c, valid = env.evaluate(entry.states[-1], actions[i])
                evals += 1
                if not valid:
                    continue
                cand = _BeamEntry(
                    score=entry.g + float(qs[i]),
                    g=entry.g + c,
                    states=entry.states + [s2],
                    actions=entry.actions + [actions[i]],
                    costs=entry.costs + [c],
                )
                key = cell_of(s2)
                kept = candidates.get(key)
                if kept is None or cand.score < kept.score:
                    candidates[key] = cand
        if not candidates:
            status = PlanStatus.OPEN_EXHAUSTED_NO_SOLUTION
            frontier = []
            break
        ranked = sorted(candidates.values(), key=lambda e: e.score)
        frontier = ranked[: cfg.width]
        for entry in frontier:
            if env.goal_satisfied(entry.states[-1]):
                goal_entry = entry
                break
        if goal_entry is not None:
            status = PlanStatus.GOAL_REACHED
            break
    wall = time.perf_counter() - t0
    if goal_entry is not None:
        return _result(goal_entry.path(complete=True), status, wall, expansions, evals,
                       "beam", cfg.rng_seed)
    if status is PlanStatus.OPEN_EXHAUSTED_NO_SOLUTION or not frontier:
        return _result(Path(), PlanStatus.OPEN_EXHAUSTED_NO_SOLUTION, wall,
                       expansions, evals, "beam", cfg.rng_seed)
    best = min(frontier, key=lambda e: e.score)
    return _result(best.path(complete=False), PlanStatus.BUDGET_EXHAUSTED_PARTIAL,
                   wall, expansions, evals, "beam", cfg.rng_seed)


def _cell_fn(resolution: np.ndarray, angular_dims: tuple[int, ...]):
    res = np.asarray(resolution, dtype=float)

    def cell(s: np.ndarray) -> tuple:
        out = []
        for i in range(len(res)):
            v = float(s[i])
            if i in angular_dims:
                v = math.atan2(math.sin(v), math.cos(v))
            out.append(math.floor(v / res[i]))
        return tuple(out)

    return cell


# ---------------------------------------------------------------------------
# ePA*SE-style baseline
# ---------------------------------------------------------------------------

class EpaseStylePlanner(PachsPlanner):
    """Edge planner with action-blind, state-based heuristic priorities.

    Every outgoing edge of s gets f = g(s) + w * h(s) (identical priorities,
    insertion-order ties), and a successor's dummy gets g(s') + w * h(s').
    Requires a finite action set; successors with h = +inf are pruned.
    """

    name = "epase"

    def __init__(self, env: Environment, start: np.ndarray,
                 heuristic: Callable[[np.ndarray], float],
                 cfg: PlannerConfig, action_set: np.ndarray):
        action_set = np.asarray(action_set, dtype=float)
        if action_set.shape[0] != cfg.batch_size:
            cfg.batch_size = action_set.shape[0]
        models = fixed_action_models(action_set, zero_cost_to_go, env.state_dim)
        super().__init__(env, start, models, cfg, tie_break="fifo")
        self._h = heuristic

    def _before_search(self) -> _Terminal | None:
        if not math.isfinite(self._h(self.start)):
            return _Terminal(PlanStatus.OPEN_EXHAUSTED_NO_SOLUTION)
        return None

    def _real_edge_priority(self, node: SearchNode, q: float) -> float:
        return node.g + self.cfg.w * self._h(node.state)

    def _dummy_edge_priority(self, g_new: float, q_edge: float, c_edge: float,
                             succ: SearchNode) -> float | None:
        h = self._h(succ.state)
        if not math.isfinite(h):
            return None
        return g_new + self.cfg.w * h

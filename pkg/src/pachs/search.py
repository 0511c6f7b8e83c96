"""PACHS: parallel actor-critic heuristic search.

An edge-based best-first planner. The OPEN list holds edges: real
(state, action) pairs priced by the critic, and dummy edges that mark a
state as awaiting expansion. The coordinator pops edges in ascending
priority, checks the goal on the popped edge's source, and hands work to
workers. Expanding a state samples one batch of actions from the actor and
prices them with one batched critic call; expanding a real edge runs the
environment transition and relaxes the successor.

Priorities:
  real edge (s, a):   f = g(s) + w * q(s, a)
  successor dummy:    f = g(s') + w * (q - c)      (reuses the edge's q)

Locking: all OPEN/CLOSED/g/parent access happens under one search lock;
model inference and environment evaluation always run outside it.
"""

from __future__ import annotations

import math
import queue
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from .envs.base import Environment
from .graph import Edge, OpenList, Path, SearchNode, StateRegistry, backtrack
from .metrics import PlanStatus, RunMetrics
from .models import ModelFaultError, ModelPair

PROBE_SEED_SALT = 0x9E3779B9


class ConfigurationError(ValueError):
    """Planner/model/environment wiring is inconsistent."""


def edge_priority(g_s: float, q: float, w: float) -> float:
    """Priority of a real edge: cost-to-come plus weighted critic cost."""
    return g_s + w * q


def successor_priority(g_new: float, q_edge: float, c_edge: float, w: float) -> float:
    """Priority of a successor's dummy edge, reusing the edge's critic value."""
    return g_new + w * (q_edge - c_edge)


@dataclass
class PlannerConfig:
    w: float = 1.0
    num_workers: int = 1
    batch_size: int = 8
    resolution: np.ndarray | None = None   # None: environment default
    eval_budget: int | None = None
    time_budget: float | None = None       # seconds
    expansion_budget: int | None = None
    rng_seed: int = 0

    def __post_init__(self):
        if self.w < 0:
            raise ConfigurationError("w must be >= 0")
        if self.batch_size < 1 or self.num_workers < 1:
            raise ConfigurationError("batch_size and num_workers must be >= 1")


@dataclass
class PlanResult:
    path: Path
    status: PlanStatus
    metrics: RunMetrics


class _SearchLock:
    """Mutex + condition that records its owner.

    Lets expensive call sites assert they are not inside the critical
    section (evaluate/model calls must never run under the search lock).
    """

    def __init__(self):
        self._cond = threading.Condition()
        self._owner: int | None = None

    def __enter__(self):
        self._cond.acquire()
        self._owner = threading.get_ident()
        return self

    def __exit__(self, *exc):
        self._owner = None
        self._cond.release()
        return False

    def wait(self, timeout: float | None = None):
        self._owner = None
        self._cond.wait(timeout)
        self._owner = threading.get_ident()

    def notify_all(self):
        self._cond.notify_all()

    def held_by_caller(self) -> bool:
        return self._owner == threading.get_ident()

    def assert_outside(self, what: str):
        if self.held_by_caller():
            raise AssertionError(f"{what} must not run under the search lock")


@dataclass
class _Terminal:
    status: PlanStatus
    goal_id: int | None = None
    partial_id: int | None = None


class PachsPlanner:
    """Single-use planner instance for one query."""

    name = "pachs"

    def __init__(self, env: Environment, start: np.ndarray, models: ModelPair,
                 cfg: PlannerConfig, tie_break: str = "deep_g"):
        if models.state_dim != env.state_dim or models.action_dim != env.action_dim:
            raise ConfigurationError(
                f"model dims ({models.state_dim}, {models.action_dim}) do not match "
                f"environment dims ({env.state_dim}, {env.action_dim})"
            )
        start = np.asarray(start, dtype=float)
        if len(start) != env.state_dim:
            raise ConfigurationError("start state dim does not match environment")
        self.env = env
        self.models = models
        self.cfg = cfg
        res = cfg.resolution if cfg.resolution is not None else env.default_resolution()
        self.registry = StateRegistry(res, env.angular_dims)
        self.open = OpenList(tie_break=tie_break)
        self.lock = _SearchLock()
        self.start = start
        self._expansions = 0
        self._evaluations = 0
        self._evals_reserved = 0
        self._expansions_reserved = 0
        self._wip = 0
        self._worker_error: BaseException | None = None
        self._expand_counts: dict[int, int] = {}
        # States whose dummy has been popped for expansion: they must never
        # receive a fresh dummy, even before the expansion marks them closed.
        self._dispatched: set[int] = set()
        self._used = False
        self._terminate = False

    # -- priority hooks (overridden by the identical-priority baseline) -----

    def _real_edge_priority(self, node: SearchNode, q: float) -> float:
        return edge_priority(node.g, q, self.cfg.w)

    def _dummy_edge_priority(self, g_new: float, q_edge: float, c_edge: float,
                             succ: SearchNode) -> float | None:
        return successor_priority(g_new, q_edge, c_edge, self.cfg.w)

    def _before_search(self) -> _Terminal | None:
        return None

    # -- public API ----------------------------------------------------------

    def plan(self) -> PlanResult:
        if self._used:
            raise RuntimeError("planner instances are single-use; build a new one")
        self._used = True
        t0 = time.perf_counter()
        terminal = self._before_search()
        if terminal is None:
            self._seed_open()
            if self.cfg.num_workers == 1:
                terminal = self._run_serial(t0)
            else:
                terminal = self._run_parallel(t0)
        wall = time.perf_counter() - t0
        return self._finish(terminal, wall)

    def plan_anytime(self) -> PlanResult:
        if self.cfg.time_budget is None:
            raise ConfigurationError("plan_anytime requires a time budget")
        return self.plan()

    # -- setup ----------------------------------------------------------------

    def _seed_open(self):
        sid = self.registry.register(self.start)
        node = self.registry.nodes[sid]
        node.g = 0.0
        # Start dummy priority: w * min critic cost over a probe batch.
        # The value is irrelevant for correctness (it pops first regardless).
        probe_rng = np.random.default_rng(self.cfg.rng_seed ^ PROBE_SEED_SALT)
        actions = self.models.sample_actions(self.start, self.cfg.batch_size, probe_rng)
        qs = self.models.cost_to_go(self.start, np.asarray(actions))
        q0 = float(np.min(qs))
        with self.lock:
            self.open.insert(Edge(sid, None, q0, self.cfg.w * q0), sort_g=0.0)

    # -- worker-side operations ------------------------------------------------

    def _expand_state(self, node: SearchNode, rng: np.random.Generator):
        """Batched actor + critic, then insert the state's outgoing edges."""
        self.lock.assert_outside("model inference")
        k = self.cfg.batch_size
        actions = np.asarray(self.models.sample_actions(node.state, k, rng), dtype=float)
        if actions.shape != (k, self.env.action_dim) or not np.all(np.isfinite(actions)):
            raise ModelFaultError(f"actor returned bad batch shape {actions.shape}")
        qs = np.asarray(self.models.cost_to_go(node.state, actions), dtype=float)
        if qs.shape != (k,) or not np.all(np.isfinite(qs)):
            raise ModelFaultError("critic returned a bad cost batch")
        with self.lock:
            count = self._expand_counts.get(node.id, 0)
            if count or node.closed:
                raise AssertionError(f"state {node.id} expanded more than once")
            self._expand_counts[node.id] = 1
            g = node.g
            for i in range(k):
                f = self._real_edge_priority(node, float(qs[i]))
                self.open.insert(Edge(node.id, actions[i], float(qs[i]), f), sort_g=g)
            node.closed = True
            self._expansions += 1
            self.lock.notify_all()

    def _expand_edge(self, e: Edge, src: SearchNode):
        """Evaluate one environment transition and relax the successor."""
        self.lock.assert_outside("environment evaluation")
        s2, c, valid = self.env.evaluate(src.state, e.action)
        with self.lock:
            self._evaluations += 1
            if valid:
                sid2 = self.registry.register(s2)
                succ = self.registry.nodes[sid2]
                g_new = src.g + c
                if not succ.closed and succ.g > g_new:
                    self.registry.improve(sid2, g_new, (src.id, e.action, c))
                    if sid2 not in self._dispatched:
                        f = self._dummy_edge_priority(g_new, e.q, c, succ)
                        if f is not None:
                            self.open.upsert_dummy(sid2, f, e.q - c, sort_g=g_new)
            self.lock.notify_all()

    # -- serial driver (num_workers == 1) ---------------------------------------

    def _run_serial(self, t0: float) -> _Terminal:
        rng = np.random.default_rng(self.cfg.rng_seed ^ 0)
        deadline = None if self.cfg.time_budget is None else t0 + self.cfg.time_budget
        while True:
            if deadline is not None and time.perf_counter() >= deadline:
                return self._drained_partial()
            if self.cfg.eval_budget is not None and self._evals_reserved >= self.cfg.eval_budget:
                return self._drained_partial()
            if (
                self.cfg.expansion_budget is not None
                and self._expansions_reserved >= self.cfg.expansion_budget
            ):
                return self._drained_partial()
            with self.lock:
                e = self.open.pop_min()
            if e is None:
                return _Terminal(PlanStatus.OPEN_EXHAUSTED_NO_SOLUTION)
            node = self.registry.nodes[e.source]
            if self.env.goal_satisfied(node.state):
                return _Terminal(PlanStatus.GOAL_REACHED, goal_id=e.source)
            if e.is_dummy:
                self._expansions_reserved += 1
                self._dispatched.add(e.source)
                self._expand_state(node, rng)
            else:
                self._evals_reserved += 1
                self._expand_edge(e, node)

    def _drained_partial(self) -> _Terminal:
        with self.lock:
            e = self.open.pop_min()
        if e is None:
            return _Terminal(PlanStatus.OPEN_EXHAUSTED_NO_SOLUTION)
        return _Terminal(PlanStatus.BUDGET_EXHAUSTED_PARTIAL, partial_id=e.source)

    # -- parallel driver ----------------------------------------------------------

    def _run_parallel(self, t0: float) -> _Terminal:
        n = self.cfg.num_workers
        work: queue.SimpleQueue = queue.SimpleQueue()
        free = threading.Semaphore(n)
        workers = [
            threading.Thread(target=self._worker_loop, args=(work, free, i), daemon=True)
            for i in range(n)
        ]
        for t in workers:
            t.start()
        deadline = None if self.cfg.time_budget is None else t0 + self.cfg.time_budget
        try:
            return self._coordinate(work, free, deadline)
        finally:
            self._terminate = True
            for _ in workers:
                work.put(None)
            for t in workers:
                t.join()

    def _coordinate(self, work, free, deadline) -> _Terminal:
        while True:
            dispatch = None
            with self.lock:
                while True:
                    if self._worker_error is not None:
                        raise self._worker_error
                    out_of_budget = (
                        (deadline is not None and time.perf_counter() >= deadline)
                        or (
                            self.cfg.eval_budget is not None
                            and self._evals_reserved >= self.cfg.eval_budget
                        )
                        or (
                            self.cfg.expansion_budget is not None
                            and self._expansions_reserved >= self.cfg.expansion_budget
                        )
                    )
                    if out_of_budget:
                        # Stop dispatching; let in-flight work land, then take
                        # the best remaining edge as the partial-path anchor.
                        while self._wip > 0 and self._worker_error is None:
                            self.lock.wait(0.05)
                        if self._worker_error is not None:
                            raise self._worker_error
                        e = self.open.pop_min()
                        if e is None:
                            return _Terminal(PlanStatus.OPEN_EXHAUSTED_NO_SOLUTION)
                        return _Terminal(
                            PlanStatus.BUDGET_EXHAUSTED_PARTIAL, partial_id=e.source
                        )
                    if len(self.open) == 0:
                        if self._wip == 0:
                            return _Terminal(PlanStatus.OPEN_EXHAUSTED_NO_SOLUTION)
                        self.lock.wait(0.05 if deadline is not None else None)
                        continue
                    e = self.open.pop_min()
                    node = self.registry.nodes[e.source]
                    if self.env.goal_satisfied(node.state):
                        return _Terminal(PlanStatus.GOAL_REACHED, goal_id=e.source)
                    self._wip += 1
                    if e.is_dummy:
                        self._expansions_reserved += 1
                        self._dispatched.add(e.source)
                    else:
                        self._evals_reserved += 1
                    dispatch = e
                    break
            # Block outside the lock until some worker is free.
            free.acquire()
            work.put(dispatch)

    def _worker_loop(self, work: queue.SimpleQueue, free: threading.Semaphore, widx: int):
        rng = np.random.default_rng(self.cfg.rng_seed ^ widx)
        while True:
            item = work.get()
            if item is None:
                return
            try:
                node = self.registry.nodes[item.source]
                if item.is_dummy:
                    self._expand_state(node, rng)
                else:
                    self._expand_edge(item, node)
            except BaseException as exc:
                with self.lock:
                    if self._worker_error is None:
                        self._worker_error = exc
                    self._wip -= 1
                    self.lock.notify_all()
            else:
                with self.lock:
                    self._wip -= 1
                    self.lock.notify_all()
            finally:
                # Matching release for the coordinator's acquire.
                free.release()

    # -- result assembly ------------------------------------------------------

    def _finish(self, terminal: _Terminal, wall: float) -> PlanResult:
        status = terminal.status
        if status is PlanStatus.GOAL_REACHED:
            path = backtrack(self.registry, terminal.goal_id)
            path.complete = True
        elif status is PlanStatus.BUDGET_EXHAUSTED_PARTIAL:
            path = backtrack(self.registry, terminal.partial_id)
            path.complete = self.env.goal_satisfied(path.final_state)
        else:
            path = Path()
        metrics = RunMetrics(
            success=status is PlanStatus.GOAL_REACHED,
            status=status.value,
            wall_time=wall,
            solution_cost=path.total_cost if status is PlanStatus.GOAL_REACHED else None,
            expansions=self._expansions,
            evaluations=self._evaluations,
            planner=self.name,
            seed=self.cfg.rng_seed,
        )
        return PlanResult(path=path, status=status, metrics=metrics)

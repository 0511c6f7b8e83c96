"""Search-state containers: lattice-deduplicated state registry, edges,
the OPEN priority structure, and path reconstruction.

None of these containers synchronize internally; the owning planner must
hold its search lock around every mutating call.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import wrap_angle


class InternalFaultError(RuntimeError):
    """A search-graph invariant was violated (broken parent chain etc.)."""


class SearchNode:
    """Per-cell search record. Once closed, every field is frozen."""

    __slots__ = ("id", "state", "g", "parent", "closed")

    def __init__(self, node_id: int, state: np.ndarray):
        self.id = node_id
        self.state = state
        self.g = math.inf
        self.parent: tuple[int, np.ndarray, float] | None = None
        self.closed = False

    def __setattr__(self, name, value):
        if getattr(self, "closed", False):
            raise AttributeError(
                f"node {self.id} is closed; field '{name}' is frozen"
            )
        object.__setattr__(self, name, value)

    def __repr__(self):
        return f"SearchNode(id={self.id}, g={self.g:.6g}, closed={self.closed})"


class StateRegistry:
    """Maps continuous states to lattice cells and owns the node table.

    Two states falling in the same cell (per-dimension floor of s_i/res_i,
    angular dimensions wrapped to (-pi, pi] first) share one StateId. The
    first-registered continuous state is the cell's representative and is
    the state used for all later expansions of that node.
    """

    def __init__(self, resolution: np.ndarray, angular_dims: tuple[int, ...] = ()):
        res = np.asarray(resolution, dtype=float)
        if res.ndim != 1 or np.any(res <= 0):
            raise ValueError("resolution must be a 1-D vector of positive reals")
        self._res = res
        self._angular = tuple(angular_dims)
        self._cells: dict[tuple[int, ...], int] = {}
        self.nodes: list[SearchNode] = []

    @property
    def dim(self) -> int:
        return self._res.shape[0]

    def cell_of(self, s: np.ndarray) -> tuple[int, ...]:
        if len(s) != self._res.shape[0]:
            raise ValueError(
                f"state dim {len(s)} does not match lattice dim {self._res.shape[0]}"
            )
        cell = []
        for i in range(len(s)):
            v = float(s[i])
            if not math.isfinite(v):
                raise ValueError("state components must be finite")
            if i in self._angular:
                v = wrap_angle(v)
            cell.append(math.floor(v / float(self._res[i])))
        return tuple(cell)

    def register(self, s: np.ndarray) -> int:
        """Return the StateId for s, allocating a fresh node on first visit."""
        cell = self.cell_of(s)
        sid = self._cells.get(cell)
        if sid is None:
            sid = len(self.nodes)
            self._cells[cell] = sid
            self.nodes.append(SearchNode(sid, np.array(s, dtype=float, copy=True)))
        return sid

    def improve(self, sid: int, g: float, parent: tuple[int, np.ndarray, float] | None):
        """Lower a node's g and reset its parent; g must strictly decrease."""
        node = self.nodes[sid]
        if not g < node.g:
            raise InternalFaultError(
                f"non-decreasing g write on node {sid}: {g} >= {node.g}"
            )
        node.g = g
        node.parent = parent

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass
class Edge:
    """OPEN-list entry: a real (state, action) pair or a dummy state marker.

    A dummy edge (action is None) is the placeholder meaning "this state is
    ready for expansion"; exactly one live dummy exists per discovered,
    not-yet-closed state.
    """

    source: int
    action: np.ndarray | None
    q: float
    f: float

    @property
    def is_dummy(self) -> bool:
        return self.action is None


class OpenList:
    """Min-heap of edges keyed by f with dummy-edge priority updates.

    Ties are broken either by larger g first then insertion order
    ("deep_g", the default), or purely by insertion order ("fifo").
    Dummy updates use lazy deletion: the superseded heap entry is marked
    stale and skipped on pop.
    """

    def __init__(self, tie_break: str = "deep_g"):
        if tie_break not in ("deep_g", "fifo"):
            raise ValueError(f"unknown tie_break {tie_break!r}")
        self._deep_g = tie_break == "deep_g"
        self._heap: list[list] = []
        self._live_dummy: dict[int, list] = {}
        self._seq = 0
        self._n = 0

    def __len__(self) -> int:
        return self._n

    def _push(self, edge: Edge, sort_g: float):
        if not math.isfinite(edge.f):
            raise ValueError(f"edge priority must be finite, got {edge.f}")
        tie = -sort_g if self._deep_g else 0.0
        entry = [edge.f, tie, self._seq, edge, True]
        self._seq += 1
        heapq.heappush(self._heap, entry)
        self._n += 1
        return entry

    def insert(self, edge: Edge, sort_g: float):
        entry = self._push(edge, sort_g)
        if edge.is_dummy:
            if edge.source in self._live_dummy:
                raise InternalFaultError(
                    f"state {edge.source} already has a live dummy edge"
                )
            self._live_dummy[edge.source] = entry

    def update_dummy(self, sid: int, f_new: float, q_new: float, sort_g: float):
        old = self._live_dummy.get(sid)
        if old is None:
            raise InternalFaultError(f"no live dummy edge for state {sid}")
        old[4] = False
        self._n -= 1
        self._live_dummy[sid] = self._push(Edge(sid, None, q_new, f_new), sort_g)

    def upsert_dummy(self, sid: int, f: float, q: float, sort_g: float):
        if sid in self._live_dummy:
            self.update_dummy(sid, f, q, sort_g)
        else:
            self.insert(Edge(sid, None, q, f), sort_g)

    def has_dummy(self, sid: int) -> bool:
        return sid in self._live_dummy

    def pop_min(self) -> Edge | None:
        """Remove and return the minimum-f edge, or None when empty."""
        while self._heap:
            f, tie, seq, edge, valid = heapq.heappop(self._heap)
            if not valid:
                continue
            self._n -= 1
            if edge.is_dummy:
                self._live_dummy.pop(edge.source, None)
            return edge
        return None

    def peek_f(self) -> float:
        while self._heap and not self._heap[0][4]:
            heapq.heappop(self._heap)
        if not self._heap:
            raise IndexError("peek on empty OPEN")
        return self._heap[0][0]


@dataclass
class Path:
    """A start-anchored trajectory: states[i] --actions[i]--> states[i+1].

    An empty path has no states at all (used by the no-solution result); a
    zero-length path at the start has one state and no actions.
    """

    states: list[np.ndarray] = field(default_factory=list)
    actions: list[np.ndarray] = field(default_factory=list)
    costs: list[float] = field(default_factory=list)
    total_cost: float = 0.0
    complete: bool = False

    def __len__(self) -> int:
        return len(self.actions)

    @property
    def empty(self) -> bool:
        return not self.states

    @property
    def final_state(self) -> np.ndarray:
        if not self.states:
            raise InternalFaultError("empty path has no final state")
        return self.states[-1]


def backtrack(registry: StateRegistry, goal_id: int) -> Path:
    """Reconstruct the parent-chain path from the start node to goal_id."""
    node = registry.nodes[goal_id]
    if not math.isfinite(node.g):
        raise InternalFaultError(f"backtrack from unreached node {goal_id}")
    states = [node.state]
    actions: list[np.ndarray] = []
    costs: list[float] = []
    hops = 0
    while node.parent is not None:
        pid, action, cost = node.parent
        actions.append(action)
        costs.append(cost)
        node = registry.nodes[pid]
        states.append(node.state)
        hops += 1
        if hops > len(registry.nodes):
            raise InternalFaultError("parent chain does not terminate (cycle)")
    states.reverse()
    actions.reverse()
    costs.reverse()
    return Path(states=states, actions=actions, costs=costs, total_cost=sum(costs))

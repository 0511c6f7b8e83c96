"""Hand-crafted distance-field heuristic for Nav2D.

8-connected breadth-first distance over the free-cell grid, propagated from
the goal cell with axis steps of cell_size and diagonal steps of
cell_size * sqrt(2). Queries return the value of the cell containing the
state; blocked or unreached cells return +inf.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

from .nav2d import Nav2DWorld


class GridDistanceField:
    def __init__(self, world: Nav2DWorld, cell_size: float):
        if cell_size <= 0:
            raise ValueError("cell_size must be > 0")
        self.world = world
        self.cell = float(cell_size)
        b = world.bounds
        self.nx = max(1, int(math.ceil((b.xmax - b.xmin) / self.cell)))
        self.ny = max(1, int(math.ceil((b.ymax - b.ymin) / self.cell)))
        self.free = np.ones((self.nx, self.ny), dtype=bool)
        for ix in range(self.nx):
            for iy in range(self.ny):
                cx = b.xmin + (ix + 0.5) * self.cell
                cy = b.ymin + (iy + 0.5) * self.cell
                if any(ob.contains(cx, cy) for ob in world.obstacles):
                    self.free[ix, iy] = False
        gi = self._cell_index(world.goal_center[0], world.goal_center[1])
        if gi is None or not self.free[gi]:
            raise ValueError("goal cell is blocked or out of bounds")
        self.dist = self._sweep(gi)

    def _cell_index(self, x: float, y: float):
        b = self.world.bounds
        ix = int(math.floor((x - b.xmin) / self.cell))
        iy = int(math.floor((y - b.ymin) / self.cell))
        if 0 <= ix < self.nx and 0 <= iy < self.ny:
            return ix, iy
        return None

    def _sweep(self, goal_idx) -> np.ndarray:
        diag = self.cell * math.sqrt(2.0)
        dist = np.full((self.nx, self.ny), math.inf)
        dist[goal_idx] = 0.0
        heap = [(0.0, goal_idx)]
        while heap:
            d, (ix, iy) = heapq.heappop(heap)
            if d > dist[ix, iy]:
                continue
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    if dx == 0 and dy == 0:
                        continue
                    jx, jy = ix + dx, iy + dy
                    if not (0 <= jx < self.nx and 0 <= jy < self.ny):
                        continue
                    if not self.free[jx, jy]:
                        continue
                    nd = d + (diag if dx != 0 and dy != 0 else self.cell)
                    if nd < dist[jx, jy]:
                        dist[jx, jy] = nd
                        heapq.heappush(heap, (nd, (jx, jy)))
        return dist

    def query(self, s: np.ndarray) -> float:
        idx = self._cell_index(float(s[0]), float(s[1]))
        if idx is None:
            return math.inf
        return float(self.dist[idx])

    def reachable(self, s: np.ndarray) -> bool:
        return math.isfinite(self.query(s))

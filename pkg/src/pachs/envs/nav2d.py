"""Collision-free 2D point navigation among axis-aligned rectangles.

The shelf analog: the agent is a point, actions are position deltas, a
transition is valid iff the swept segment stays in bounds and clears every
obstacle rectangle. Edge cost is the travelled distance.
"""

from __future__ import annotations

import math

import numpy as np

from ..geometry import Rect, segment_hits_rect, segment_in_rect
from .base import Environment


class Nav2DWorld(Environment):
    state_dim = 2
    action_dim = 2
    angular_dims: tuple[int, ...] = ()

    def __init__(
        self,
        bounds: Rect,
        obstacles: list[Rect],
        goal_center: np.ndarray,
        goal_radius: float,
        max_action_norm: float,
        resolution: float,
    ):
        self.bounds = bounds
        self.obstacles = list(obstacles)
        self.goal_center = np.asarray(goal_center, dtype=float)
        self.goal_radius = float(goal_radius)
        self.max_action_norm = float(max_action_norm)
        self.resolution = float(resolution)

    def default_resolution(self) -> np.ndarray:
        return np.array([self.resolution, self.resolution])

    def evaluate(self, s: np.ndarray, a: np.ndarray) -> tuple[np.ndarray, float, bool]:
        self._check_action(a)
        x0, y0 = float(s[0]), float(s[1])
        x1, y1 = x0 + float(a[0]), y0 + float(a[1])
        valid = segment_in_rect(x0, y0, x1, y1, self.bounds)
        if valid:
            for ob in self.obstacles:
                if segment_hits_rect(x0, y0, x1, y1, ob):
                    valid = False
                    break
        cost = math.hypot(x1 - x0, y1 - y0)
        return np.array([x1, y1]), cost, valid

    def goal_satisfied(self, s: np.ndarray) -> bool:
        return (
            math.hypot(float(s[0]) - self.goal_center[0], float(s[1]) - self.goal_center[1])
            <= self.goal_radius
        )

    def valid_state(self, s: np.ndarray) -> bool:
        x, y = float(s[0]), float(s[1])
        if not self.bounds.contains(x, y):
            return False
        return not any(ob.contains(x, y) for ob in self.obstacles)

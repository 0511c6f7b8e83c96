"""Quasi-static planar push-T environment.

State packs (pusher_x, pusher_y, object_x, object_y, object_theta); the
action is a pusher position delta. The T is two rigidly joined rectangles
(bar + stem) decomposed into disjoint convex parts in the body frame, with
the body origin at the shape's area centroid.

Dynamics: the action is integrated in substeps; whenever the pusher disc
penetrates the T, the object translates along the push direction by
kappa_t * depth and rotates by kappa_r * depth * cross(contact - centroid,
push_dir), then residual penetration is projected out (<= 3 iterations,
1e-6 m tolerance). Deterministic, inertia-free, reentrant.
"""

from __future__ import annotations

import math

import numpy as np

from ..geometry import (
    BodyRect,
    Rect,
    body_rect_corners,
    clip_convex,
    convex_polys_intersect,
    polygon_area,
    rect_to_poly,
    wrap_angle,
)
from .base import Environment


def _integrate_push(px, py, ox, oy, oth, dx, dy, n_sub, nx, ny, parts,
                    rp, shape_radius, kt, kr):
    """Substep integration of a pusher translation against the T.

    parts is a (n, 4) array of body-frame rectangles (cx, cy, hw, hh).
    Scalar-only math so the numba-compiled variant is bit-identical to
    this pure-Python fallback.
    """
    reach = rp + shape_radius
    reach2 = reach * reach
    for _ in range(n_sub):
        px += dx
        py += dy
        ddx = px - ox
        ddy = py - oy
        if ddx * ddx + ddy * ddy > reach2:
            continue
        ct = math.cos(oth)
        st = math.sin(oth)
        rx = ct * ddx + st * ddy
        ry = -st * ddx + ct * ddy
        best_d2 = 1e300
        bqx = 0.0
        bqy = 0.0
        for i in range(parts.shape[0]):
            lx = rx - parts[i, 0]
            ly = ry - parts[i, 1]
            hw = parts[i, 2]
            hh = parts[i, 3]
            qx = -hw if lx < -hw else (hw if lx > hw else lx)
            qy = -hh if ly < -hh else (hh if ly > hh else ly)
            ex = lx - qx
            ey = ly - qy
            d2 = ex * ex + ey * ey
            if d2 < best_d2:
                best_d2 = d2
                bqx = parts[i, 0] + qx
                bqy = parts[i, 1] + qy
        depth = rp - math.sqrt(best_d2)
        if depth <= 0.0:
            continue
        wx = ct * bqx - st * bqy
        wy = st * bqx + ct * bqy
        lever = wx * ny - wy * nx
        ox += kt * depth * nx
        oy += kt * depth * ny
        oth = oth + kr * depth * lever
        if oth > math.pi:
            oth -= 2.0 * math.pi
        elif oth <= -math.pi:
            oth += 2.0 * math.pi
        for _j in range(3):
            ct = math.cos(oth)
            st = math.sin(oth)
            ddx = px - ox
            ddy = py - oy
            rx = ct * ddx + st * ddy
            ry = -st * ddx + ct * ddy
            best_d2 = 1e300
            for i in range(parts.shape[0]):
                lx = rx - parts[i, 0]
                ly = ry - parts[i, 1]
                hw = parts[i, 2]
                hh = parts[i, 3]
                qx = -hw if lx < -hw else (hw if lx > hw else lx)
                qy = -hh if ly < -hh else (hh if ly > hh else ly)
                ex = lx - qx
                ey = ly - qy
                d2 = ex * ex + ey * ey
                if d2 < best_d2:
                    best_d2 = d2
            residual = rp - math.sqrt(best_d2)
            if residual <= 1e-6:
                break
            ox += residual * nx
            oy += residual * ny
    return px, py, ox, oy, oth


try:  # optional: ~10x faster contact integration when numba is present
    from numba import njit as _njit

    _integrate_push_fast = _njit(cache=True, fastmath=False)(_integrate_push)
except ImportError:  # pragma: no cover
    _integrate_push_fast = None


class TShape:
    """Bar-over-stem rigid shape; body frame centered on the area centroid."""

    def __init__(self, bar_w: float, bar_h: float, stem_w: float, stem_h: float):
        if min(bar_w, bar_h, stem_w, stem_h) <= 0:
            raise ValueError("shape dimensions must be positive")
        # Stem spans y in [0, stem_h), bar sits on top sharing one edge.
        stem = BodyRect(0.0, stem_h / 2.0, stem_w / 2.0, stem_h / 2.0)
        bar = BodyRect(0.0, stem_h + bar_h / 2.0, bar_w / 2.0, bar_h / 2.0)
        area = stem.area + bar.area
        cy = (stem.area * stem.cy + bar.area * bar.cy) / area
        self.parts = [
            BodyRect(stem.cx, stem.cy - cy, stem.hw, stem.hh),
            BodyRect(bar.cx, bar.cy - cy, bar.hw, bar.hh),
        ]
        self.area = area
        self.bar_w = bar_w
        self.bar_h = bar_h
        self.stem_w = stem_w
        self.stem_h = stem_h
        self.radius = max(
            math.hypot(p.cx + sx * p.hw, p.cy + sy * p.hh)
            for p in self.parts
            for sx in (-1, 1)
            for sy in (-1, 1)
        )

    def polygons(self, x: float, y: float, theta: float) -> list[list[tuple[float, float]]]:
        ct, st = math.cos(theta), math.sin(theta)
        return [body_rect_corners(p, x, y, ct, st) for p in self.parts]


def coverage(
    pose_a: tuple[float, float, float],
    pose_b: tuple[float, float, float],
    shape: TShape,
) -> float:
    """area(A intersect B) / area(B) for the shape at the two poses."""
    if shape.area <= 0:
        raise ValueError("degenerate shape with zero area")
    polys_a = shape.polygons(*pose_a)
    polys_b = shape.polygons(*pose_b)
    inter = 0.0
    for pa in polys_a:
        for pb in polys_b:
            inter += polygon_area(clip_convex(pa, pb))
    return inter / shape.area


class PushT2DWorld(Environment):
    state_dim = 5
    action_dim = 2
    angular_dims = (4,)

    def __init__(
        self,
        table: Rect,
        shape: TShape,
        pusher_radius: float,
        goal_pose: tuple[float, float, float],
        obstacles: list[Rect],
        kappa_t: float,
        kappa_r: float,
        substep: float,
        max_action_norm: float,
        cost_floor: float,
        pos_resolution: float,
        theta_resolution: float,
        goal_coverage: float = 0.9,
    ):
        self.table = table
        self.shape = shape
        self.pusher_radius = float(pusher_radius)
        self.goal_pose = (float(goal_pose[0]), float(goal_pose[1]), wrap_angle(float(goal_pose[2])))
        self.obstacles = list(obstacles)
        self._obstacle_polys = [rect_to_poly(ob) for ob in obstacles]
        self.kappa_t = float(kappa_t)
        self.kappa_r = float(kappa_r)
        self.substep = float(substep)
        self.max_action_norm = float(max_action_norm)
        self.cost_floor = float(cost_floor)
        self.pos_resolution = float(pos_resolution)
        self.theta_resolution = float(theta_resolution)
        self.goal_coverage = float(goal_coverage)
        self._parts = [(p.cx, p.cy, p.hw, p.hh) for p in shape.parts]
        self._parts_arr = np.array(self._parts, dtype=float)
        self._integrate = (
            _integrate_push_fast if _integrate_push_fast is not None else _integrate_push
        )

    def default_resolution(self) -> np.ndarray:
        pr = self.pos_resolution
        return np.array([pr, pr, pr, pr, self.theta_resolution])

    def _segment_clears_object(self, px, py, qx, qy, ox, oy) -> bool:
        """Conservative no-contact test: pusher path vs object bounding circle."""
        reach = self.pusher_radius + self.shape.radius
        vx, vy = qx - px, qy - py
        wx, wy = ox - px, oy - py
        vv = vx * vx + vy * vy
        t = 0.0 if vv <= 0.0 else max(0.0, min(1.0, (wx * vx + wy * vy) / vv))
        dx = wx - t * vx
        dy = wy - t * vy
        return dx * dx + dy * dy > reach * reach

    def evaluate(self, s: np.ndarray, a: np.ndarray) -> tuple[np.ndarray, float, bool]:
        self._check_action(a)
        px, py = float(s[0]), float(s[1])
        ox, oy, oth = float(s[2]), float(s[3]), wrap_angle(float(s[4]))
        ax, ay = float(a[0]), float(a[1])
        norm = math.hypot(ax, ay)
        if norm > 1e-12:
            if self._segment_clears_object(px, py, px + ax, py + ay, ox, oy):
                px += ax
                py += ay
            else:
                n_sub = max(1, int(math.ceil(norm / self.substep)))
                px, py, ox, oy, oth = self._integrate(
                    px, py, ox, oy, oth, ax / n_sub, ay / n_sub, n_sub,
                    ax / norm, ay / norm, self._parts_arr,
                    self.pusher_radius, self.shape.radius,
                    self.kappa_t, self.kappa_r,
                )
        s2 = np.array([px, py, ox, oy, oth])
        return s2, norm + self.cost_floor, self._pose_valid(px, py, ox, oy, oth)

    def _pose_valid(self, px, py, ox, oy, oth) -> bool:
        if not self.table.contains(px, py):
            return False
        r = self.shape.radius
        t = self.table
        # Bounding-circle fast paths before exact polygon tests.
        if (
            ox - r >= t.xmin and ox + r <= t.xmax
            and oy - r >= t.ymin and oy + r <= t.ymax
        ):
            in_bounds = True
            polys = None
        else:
            polys = self.shape.polygons(ox, oy, oth)
            in_bounds = all(
                t.contains(x, y) for poly in polys for x, y in poly
            )
        if not in_bounds:
            return False
        for ob, obp in zip(self.obstacles, self._obstacle_polys):
            cx = ox if ob.xmin <= ox <= ob.xmax else (ob.xmin if ox < ob.xmin else ob.xmax)
            cy = oy if ob.ymin <= oy <= ob.ymax else (ob.ymin if oy < ob.ymin else ob.ymax)
            if (cx - ox) ** 2 + (cy - oy) ** 2 > r * r:
                continue
            if polys is None:
                polys = self.shape.polygons(ox, oy, oth)
            for poly in polys:
                if convex_polys_intersect(poly, obp):
                    return False
        return True

    def goal_satisfied(self, s: np.ndarray) -> bool:
        pose = (float(s[2]), float(s[3]), float(s[4]))
        return coverage(pose, self.goal_pose, self.shape) >= self.goal_coverage

    def valid_state(self, s: np.ndarray) -> bool:
        return self._pose_valid(
            float(s[0]), float(s[1]), float(s[2]), float(s[3]), float(s[4])
        )

    def object_pose(self, s: np.ndarray) -> tuple[float, float, float]:
        return (float(s[2]), float(s[3]), float(s[4]))

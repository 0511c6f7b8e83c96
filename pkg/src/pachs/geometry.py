"""2D geometry primitives shared by the analog environments.

Everything here works on plain floats and tuples: these routines sit inside
the per-substep contact loop and the collision checker, where numpy's
per-call overhead dominates the actual arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Reduce an angle to (-pi, pi]."""
    t = math.fmod(theta, TWO_PI)
    if t > math.pi:
        t -= TWO_PI
    elif t <= -math.pi:
        t += TWO_PI
    return t


def clamp(x: float, lo: float, hi: float) -> float:
    return lo if x < lo else hi if x > hi else x


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle, closed on its boundary."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def contains(self, x: float, y: float) -> bool:
        return self.xmin <= x <= self.xmax and self.ymin <= y <= self.ymax


def segment_hits_rect(x0: float, y0: float, x1: float, y1: float, r: Rect) -> bool:
    """True iff the closed segment intersects the closed rectangle.

    Liang-Barsky parametric clipping; boundary contact counts as a hit.
    """
    dx = x1 - x0
    dy = y1 - y0
    t0, t1 = 0.0, 1.0
    for p, q in (
        (-dx, x0 - r.xmin),
        (dx, r.xmax - x0),
        (-dy, y0 - r.ymin),
        (dy, r.ymax - y0),
    ):
        if p == 0.0:
            if q < 0.0:
                return False
        else:
            t = q / p
            if p < 0.0:
                if t > t1:
                    return False
                if t > t0:
                    t0 = t
            else:
                if t < t0:
                    return False
                if t < t1:
                    t1 = t
    return t0 <= t1


def segment_in_rect(x0: float, y0: float, x1: float, y1: float, r: Rect) -> bool:
    """True iff the segment lies entirely inside the (convex) rectangle."""
    return r.contains(x0, y0) and r.contains(x1, y1)


@dataclass(frozen=True)
class BodyRect:
    """Rectangle fixed in a rigid body's frame: center offset + half extents."""

    cx: float
    cy: float
    hw: float
    hh: float

    @property
    def area(self) -> float:
        return 4.0 * self.hw * self.hh


def body_rect_corners(
    part: BodyRect, x: float, y: float, ct: float, st: float
) -> list[tuple[float, float]]:
    """World-frame corners (CCW) of a body rectangle at pose (x, y, theta)."""
    out = []
    for sx, sy in ((-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)):
        lx = part.cx + sx * part.hw
        ly = part.cy + sy * part.hh
        out.append((x + ct * lx - st * ly, y + st * lx + ct * ly))
    return out


def closest_point_on_body_rect(
    px: float, py: float, part: BodyRect, x: float, y: float, ct: float, st: float
) -> tuple[float, float, float]:
    """Closest point of the solid rectangle to (px, py) and its distance.

    Distance is 0 when the query point is inside the rectangle.
    """
    rx = px - x
    ry = py - y
    lx = ct * rx + st * ry - part.cx
    ly = -st * rx + ct * ry - part.cy
    qx = clamp(lx, -part.hw, part.hw)
    qy = clamp(ly, -part.hh, part.hh)
    ddx = lx - qx
    ddy = ly - qy
    dist = math.sqrt(ddx * ddx + ddy * ddy)
    wx = part.cx + qx
    wy = part.cy + qy
    return (x + ct * wx - st * wy, y + st * wx + ct * wy, dist)


def polygon_area(poly: list[tuple[float, float]]) -> float:
    """Unsigned shoelace area."""
    n = len(poly)
    if n < 3:
        return 0.0
    acc = 0.0
    x0, y0 = poly[-1]
    for x1, y1 in poly:
        acc += x0 * y1 - x1 * y0
        x0, y0 = x1, y1
    return abs(acc) * 0.5


def clip_convex(
    subject: list[tuple[float, float]], clip: list[tuple[float, float]]
) -> list[tuple[float, float]]:
    """Sutherland-Hodgman clip of a polygon against a convex CCW clip polygon."""
    output = subject
    n = len(clip)
    cx0, cy0 = clip[-1]
    for i in range(n):
        cx1, cy1 = clip[i]
        if not output:
            return []
        ex = cx1 - cx0
        ey = cy1 - cy0
        inp = output
        output = []
        sx, sy = inp[-1]
        s_in = ex * (sy - cy0) - ey * (sx - cx0) >= 0.0
        for px, py in inp:
            p_in = ex * (py - cy0) - ey * (px - cx0) >= 0.0
            if p_in:
                if not s_in:
                    output.append(_edge_cross(cx0, cy0, cx1, cy1, sx, sy, px, py))
                output.append((px, py))
            elif s_in:
                output.append(_edge_cross(cx0, cy0, cx1, cy1, sx, sy, px, py))
            sx, sy = px, py
            s_in = p_in
        cx0, cy0 = cx1, cy1
    return output


def _edge_cross(
    cx0: float, cy0: float, cx1: float, cy1: float,
    sx: float, sy: float, px: float, py: float,
) -> tuple[float, float]:
    dcx = cx0 - cx1
    dcy = cy0 - cy1
    dpx = sx - px
    dpy = sy - py
    n1 = cx0 * cy1 - cy0 * cx1
    n2 = sx * py - sy * px
    den = dcx * dpy - dcy * dpx
    return ((n1 * dpx - n2 * dcx) / den, (n1 * dpy - n2 * dcy) / den)


def convex_polys_intersect(
    a: list[tuple[float, float]], b: list[tuple[float, float]]
) -> bool:
    """Separating-axis test for two convex polygons (touching counts)."""
    for poly, other in ((a, b), (b, a)):
        n = len(poly)
        x0, y0 = poly[-1]
        for i in range(n):
            x1, y1 = poly[i]
            axx = y0 - y1
            axy = x1 - x0
            amin = math.inf
            amax = -math.inf
            for px, py in poly:
                d = axx * px + axy * py
                if d < amin:
                    amin = d
                if d > amax:
                    amax = d
            bmin = math.inf
            bmax = -math.inf
            for px, py in other:
                d = axx * px + axy * py
                if d < bmin:
                    bmin = d
                if d > bmax:
                    bmax = d
            if amax < bmin or bmax < amin:
                return False
            x0, y0 = x1, y1
    return True


def rect_to_poly(r: Rect) -> list[tuple[float, float]]:
    return [(r.xmin, r.ymin), (r.xmax, r.ymin), (r.xmax, r.ymax), (r.xmin, r.ymax)]


def ray_exit_distance(
    ox: float, oy: float, dx: float, dy: float,
    parts: list[BodyRect], x: float, y: float, ct: float, st: float,
) -> float:
    """Farthest intersection parameter of a ray with a union of body rects.

    Returns 0.0 if the ray misses every part (degenerate query from outside).
    """
    # Work in the body frame so each part is an AABB.
    rx = ox - x
    ry = oy - y
    lox = ct * rx + st * ry
    loy = -st * rx + ct * ry
    ldx = ct * dx + st * dy
    ldy = -st * dx + ct * dy
    best = 0.0
    for p in parts:
        t0, t1 = 0.0, math.inf
        ok = True
        for d, o, lo, hi in (
            (ldx, lox, p.cx - p.hw, p.cx + p.hw),
            (ldy, loy, p.cy - p.hh, p.cy + p.hh),
        ):
            if abs(d) < 1e-15:
                if o < lo or o > hi:
                    ok = False
                    break
            else:
                ta = (lo - o) / d
                tb = (hi - o) / d
                if ta > tb:
                    ta, tb = tb, ta
                t0 = max(t0, ta)
                t1 = min(t1, tb)
                if t0 > t1:
                    ok = False
                    break
        if ok and t1 > best:
            best = t1
    return best

import math

import numpy as np
import pytest

from pachs.geometry import (
    BodyRect,
    Rect,
    body_rect_corners,
    clip_convex,
    closest_point_on_body_rect,
    convex_polys_intersect,
    polygon_area,
    ray_exit_distance,
    segment_hits_rect,
    wrap_angle,
)


def test_wrap_angle_range():
    rng = np.random.default_rng(0)
    for theta in rng.uniform(-30, 30, 500):
        w = wrap_angle(theta)
        assert -math.pi < w <= math.pi
        assert math.isclose(math.cos(w), math.cos(theta), abs_tol=1e-12)
        assert math.isclose(math.sin(w), math.sin(theta), abs_tol=1e-12)


def test_wrap_angle_boundary():
    assert wrap_angle(math.pi) == math.pi
    assert wrap_angle(-math.pi) == math.pi
    assert wrap_angle(0.0) == 0.0


def test_segment_hits_rect_basic():
    r = Rect(0.4, -0.1, 0.6, 0.1)
    assert segment_hits_rect(0.0, 0.0, 1.0, 0.0, r)       # straight through
    assert not segment_hits_rect(0.0, 0.5, 1.0, 0.5, r)   # passes above
    assert segment_hits_rect(0.45, 0.05, 0.55, 0.0, r)    # fully inside
    assert segment_hits_rect(0.0, 0.1, 1.0, 0.1, r)       # grazes closed edge


def _dense_oracle(x0, y0, x1, y1, r, n=1000):
    """Signed clearance of the sampled segment to the rectangle.

    Negative values mean a sampled point is inside; positive is the
    smallest sampled distance to the rectangle.
    """
    ts = np.linspace(0.0, 1.0, n)
    xs = x0 + ts * (x1 - x0)
    ys = y0 + ts * (y1 - y0)
    dx = np.maximum(np.maximum(r.xmin - xs, xs - r.xmax), 0.0)
    dy = np.maximum(np.maximum(r.ymin - ys, ys - r.ymax), 0.0)
    outside = np.sqrt(dx * dx + dy * dy)
    inside = (xs >= r.xmin) & (xs <= r.xmax) & (ys >= r.ymin) & (ys <= r.ymax)
    pen_x = np.minimum(xs - r.xmin, r.xmax - xs)
    pen_y = np.minimum(ys - r.ymin, r.ymax - ys)
    pen = np.where(inside, np.minimum(pen_x, pen_y), 0.0)
    if inside.any():
        return -float(pen[inside].max())
    return float(outside.min())


def test_segment_vs_dense_sampling_oracle():
    rng = np.random.default_rng(7)
    r = Rect(0.3, 0.2, 0.7, 0.5)
    checked = 0
    for _ in range(10_000):
        x0, y0, x1, y1 = rng.uniform(0, 1, 4)
        clearance = _dense_oracle(x0, y0, x1, y1, r)
        if abs(clearance) <= 1e-3:
            continue  # too close to call for the sampling oracle
        checked += 1
        assert segment_hits_rect(x0, y0, x1, y1, r) == (clearance < 0)
    assert checked > 8000


def test_polygon_area():
    square = [(0, 0), (1, 0), (1, 1), (0, 1)]
    assert polygon_area(square) == pytest.approx(1.0)
    tri = [(0, 0), (2, 0), (0, 1)]
    assert polygon_area(tri) == pytest.approx(1.0)
    assert polygon_area([(0, 0), (1, 1)]) == 0.0


def test_clip_convex_cases():
    a = [(0, 0), (1, 0), (1, 1), (0, 1)]
    assert polygon_area(clip_convex(a, a)) == pytest.approx(1.0, abs=1e-12)
    b = [(0.5, 0.5), (1.5, 0.5), (1.5, 1.5), (0.5, 1.5)]
    assert polygon_area(clip_convex(a, b)) == pytest.approx(0.25, abs=1e-12)
    far = [(5, 5), (6, 5), (6, 6), (5, 6)]
    assert clip_convex(a, far) == []


def test_clip_area_matches_intersection_flag():
    rng = np.random.default_rng(3)
    for _ in range(300):
        def rect_poly():
            cx, cy = rng.uniform(0, 1, 2)
            hw, hh = rng.uniform(0.05, 0.3, 2)
            th = rng.uniform(-math.pi, math.pi)
            return body_rect_corners(BodyRect(0, 0, hw, hh), cx, cy, math.cos(th), math.sin(th))
        pa, pb = rect_poly(), rect_poly()
        area = polygon_area(clip_convex(pa, pb))
        if area > 1e-9:
            assert convex_polys_intersect(pa, pb)
        # SAT counts boundary contact, clipping area can be zero there, so
        # only the area-positive direction is checked.


def test_closest_point_on_body_rect():
    part = BodyRect(0.0, 0.0, 0.5, 0.25)
    qx, qy, d = closest_point_on_body_rect(2.0, 0.0, part, 0.0, 0.0, 1.0, 0.0)
    assert (qx, qy) == pytest.approx((0.5, 0.0))
    assert d == pytest.approx(1.5)
    # inside: distance 0
    _, _, d0 = closest_point_on_body_rect(0.1, 0.1, part, 0.0, 0.0, 1.0, 0.0)
    assert d0 == 0.0
    # rotated 90 degrees, the long side points along y
    qx, qy, d = closest_point_on_body_rect(0.0, 2.0, part, 0.0, 0.0, 0.0, 1.0)
    assert d == pytest.approx(1.5)


def test_ray_exit_distance():
    parts = [BodyRect(0.0, 0.0, 0.5, 0.25)]
    t = ray_exit_distance(0.0, 0.0, 1.0, 0.0, parts, 0.0, 0.0, 1.0, 0.0)
    assert t == pytest.approx(0.5)
    t = ray_exit_distance(0.0, 0.0, 0.0, 1.0, parts, 0.0, 0.0, 1.0, 0.0)
    assert t == pytest.approx(0.25)
    # rotated body: exit along world x now crosses the short extent
    t = ray_exit_distance(0.0, 0.0, 1.0, 0.0, parts, 0.0, 0.0, 0.0, 1.0)
    assert t == pytest.approx(0.25)
    assert ray_exit_distance(5.0, 5.0, 1.0, 0.0, parts, 0.0, 0.0, 1.0, 0.0) == 0.0

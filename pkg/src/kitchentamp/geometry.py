"""Planar convex geometry.

Every body is a rounded convex polygon: a convex core (1, 2 or more vertices,
counter-clockwise) swept by a disc of ``radius``. Discs, capsules and boxes
are all special cases, so one exact test covers every pair.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

MARGIN = 1e-9  # touching counts as contact


class lazy:
    """Compute-once attribute stored on the instance (works on frozen dataclasses)."""

    def __init__(self, fn):
        self.fn, self.name = fn, fn.__name__
        self.__doc__ = fn.__doc__

    def __set_name__(self, owner, name):
        self.name = name

    def __get__(self, obj, owner=None):
        if obj is None:
            return self
        val = self.fn(obj)
        obj.__dict__[self.name] = val
        return val

Point = tuple[float, float]
Pose2 = tuple[float, float, float]


def wrap_angle(a: float) -> float:
    return (a + math.pi) % (2 * math.pi) - math.pi


def transform(pose: Pose2, p: Point) -> Point:
    x, y, th = pose
    c, s = math.cos(th), math.sin(th)
    return (x + c * p[0] - s * p[1], y + s * p[0] + c * p[1])


def compose(a: Pose2, b: Pose2) -> Pose2:
    x, y = transform(a, (b[0], b[1]))
    return (x, y, wrap_angle(a[2] + b[2]))


def invert(a: Pose2) -> Pose2:
    x, y, th = a
    c, s = math.cos(th), math.sin(th)
    return (-c * x - s * y, s * x - c * y, wrap_angle(-th))


@dataclass(frozen=True)
class Shape:
    verts: tuple[Point, ...]
    radius: float = 0.0

    def __post_init__(self):
        if not self.verts:
            raise ValueError("shape needs at least one vertex")
        if self.radius < 0:
            raise ValueError("negative radius")
        if len(self.verts) >= 3 and _signed_area(self.verts) <= 0:
            raise ValueError("polygon vertices must be counter-clockwise and non-degenerate")

    def moved(self, pose: Pose2) -> "Shape":
        return Shape(tuple(transform(pose, v) for v in self.verts), self.radius)

    def inflated(self, r: float) -> "Shape":
        return Shape(self.verts, self.radius + r)

    @lazy
    def aabb(self) -> tuple[float, float, float, float]:
        xs = [v[0] for v in self.verts]
        ys = [v[1] for v in self.verts]
        r = self.radius
        return (min(xs) - r, min(ys) - r, max(xs) + r, max(ys) + r)

    @property
    def centroid(self) -> Point:
        n = len(self.verts)
        return (sum(v[0] for v in self.verts) / n, sum(v[1] for v in self.verts) / n)

    def bounding_circle(self) -> tuple[Point, float]:
        c = self.centroid
        return c, max(math.dist(c, v) for v in self.verts) + self.radius

    @property
    def area(self) -> float:
        core = _signed_area(self.verts) if len(self.verts) >= 3 else 0.0
        return core + _perimeter(self.verts) * self.radius + math.pi * self.radius**2

    def contains(self, p: Point) -> bool:
        return point_distance(self, p) <= 0.0


def _signed_area(v: Sequence[Point]) -> float:
    return 0.5 * sum(v[i - 1][0] * v[i][1] - v[i][0] * v[i - 1][1] for i in range(len(v)))


def _perimeter(v: Sequence[Point]) -> float:
    if len(v) == 1:
        return 0.0
    if len(v) == 2:
        return 2 * math.dist(v[0], v[1])
    return sum(math.dist(v[i - 1], v[i]) for i in range(len(v)))


def rect(x0: float, y0: float, x1: float, y1: float) -> Shape:
    if x1 <= x0 or y1 <= y0:
        raise ValueError("empty rectangle")
    return Shape(((x0, y0), (x1, y0), (x1, y1), (x0, y1)))


def box(w: float, h: float, pose: Pose2 = (0.0, 0.0, 0.0)) -> Shape:
    return rect(-w / 2, -h / 2, w / 2, h / 2).moved(pose)


def disc(x: float, y: float, r: float) -> Shape:
    return Shape(((x, y),), r)


def capsule(p: Point, q: Point, r: float) -> Shape:
    if p == q:
        return Shape((p,), r)
    return Shape((p, q), r)


# --------------------------------------------------------------------------
# exact tests


def _seg_point_dist(a: Point, b: Point, p: Point) -> float:
    dx, dy = b[0] - a[0], b[1] - a[1]
    L2 = dx * dx + dy * dy
    if L2 == 0.0:
        return math.hypot(p[0] - a[0], p[1] - a[1])
    t = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / L2
    t = 0.0 if t < 0.0 else 1.0 if t > 1.0 else t
    return math.hypot(p[0] - a[0] - t * dx, p[1] - a[1] - t * dy)


def _orient(a: Point, b: Point, c: Point) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool:
    d1, d2 = _orient(c, d, a), _orient(c, d, b)
    d3, d4 = _orient(a, b, c), _orient(a, b, d)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 * d2 < 0 and d3 * d4 < 0


def _seg_seg_dist(a: Point, b: Point, c: Point, d: Point) -> float:
    if _segments_cross(a, b, c, d):
        return 0.0
    return min(
        _seg_point_dist(a, b, c),
        _seg_point_dist(a, b, d),
        _seg_point_dist(c, d, a),
        _seg_point_dist(c, d, b),
    )


def _edges(v: Sequence[Point]):
    if len(v) == 1:
        return [(v[0], v[0])]
    if len(v) == 2:
        return [(v[0], v[1])]
    return [(v[i - 1], v[i]) for i in range(len(v))]


def _inside_polygon(v: Sequence[Point], p: Point) -> bool:
    """Closed containment for a CCW convex polygon."""
    return all(_orient(v[i - 1], v[i], p) >= 0.0 for i in range(len(v)))


def core_distance(a: Sequence[Point], b: Sequence[Point]) -> float:
    """Euclidean distance between two convex cores; 0 when they overlap."""
    if len(a) >= 3 and any(_inside_polygon(a, p) for p in b):
        return 0.0
    if len(b) >= 3 and any(_inside_polygon(b, p) for p in a):
        return 0.0
    return min(_seg_seg_dist(p, q, r, s) for p, q in _edges(a) for r, s in _edges(b))


def _project(v: Sequence[Point], ax: float, ay: float) -> tuple[float, float]:
    ds = [p[0] * ax + p[1] * ay for p in v]
    return min(ds), max(ds)


def sat_overlap(a: Sequence[Point], b: Sequence[Point], margin: float = MARGIN) -> bool:
    """Separating-axis test for two convex polygons; contact within margin counts."""
    for poly in (a, b):
        for i in range(len(poly)):
            p, q = poly[i - 1], poly[i]
            ax, ay = q[1] - p[1], p[0] - q[0]
            n = math.hypot(ax, ay)
            if n == 0.0:
                continue
            ax, ay = ax / n, ay / n
            amin, amax = _project(a, ax, ay)
            bmin, bmax = _project(b, ax, ay)
            if amax < bmin - margin or bmax < amin - margin:
                return False
    return True


def distance(a: Shape, b: Shape) -> float:
    """Clearance between two shapes, clamped at 0 when they overlap."""
    return max(0.0, core_distance(a.verts, b.verts) - a.radius - b.radius)


def collides(a: Shape, b: Shape, margin: float = MARGIN) -> bool:
    # cheap rejection on bounding boxes
    ax0, ay0, ax1, ay1 = a.aabb
    bx0, by0, bx1, by1 = b.aabb
    if ax1 < bx0 - margin or bx1 < ax0 - margin or ay1 < by0 - margin or by1 < ay0 - margin:
        return False
    if a.radius == 0.0 and b.radius == 0.0 and len(a.verts) >= 3 and len(b.verts) >= 3:
        return sat_overlap(a.verts, b.verts, margin)
    return core_distance(a.verts, b.verts) <= a.radius + b.radius + margin


def point_distance(s: Shape, p: Point) -> float:
    """Signed-ish distance: <= 0 inside, Euclidean clearance outside."""
    v = s.verts
    if len(v) >= 3 and _inside_polygon(v, p):
        return -s.radius
    d = min(_seg_point_dist(a, b, p) for a, b in _edges(v))
    return d - s.radius


def contains_shape(outer: Shape, inner: Shape, inset: float = 0.0) -> bool:
    """Whether ``inner`` lies inside polygon ``outer`` shrunk by ``inset``."""
    v = outer.verts
    if len(v) < 3 or outer.radius:
        raise ValueError("outer must be a sharp polygon")
    for i in range(len(v)):
        p, q = v[i - 1], v[i]
        L = math.dist(p, q)
        need = inner.radius + inset
        for c in inner.verts:
            if _orient(p, q, c) / L < need - 1e-12:
                return False
    return True


# --------------------------------------------------------------------------
# vectorised queries


def distance_field(s: Shape, pts: np.ndarray) -> np.ndarray:
    """Clearance from each point to the shape; negative values are inside."""
    pts = np.asarray(pts, dtype=float)
    v = np.asarray(s.verts, dtype=float)
    best = np.full(len(pts), np.inf)
    for a, b in _edges(s.verts):
        a, b = np.asarray(a), np.asarray(b)
        d = b - a
        L2 = float(d @ d)
        rel = pts - a
        t = np.zeros(len(pts)) if L2 == 0 else np.clip(rel @ d / L2, 0.0, 1.0)
        best = np.minimum(best, np.hypot(rel[:, 0] - t * d[0], rel[:, 1] - t * d[1]))
    if len(v) >= 3:
        inside = np.ones(len(pts), dtype=bool)
        for i in range(len(v)):
            p, q = v[i - 1], v[i]
            inside &= (q[0] - p[0]) * (pts[:, 1] - p[1]) - (q[1] - p[1]) * (pts[:, 0] - p[0]) >= 0
        best = np.where(inside, -best, best)
    return best - s.radius

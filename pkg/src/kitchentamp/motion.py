"""Base motion planning on a 2 cm grid.

The base is a disc and anything carried is bounded by a disc around the base
center, so validity does not depend on heading and the search runs in (x, y);
heading is interpolated along the path. Grid cells are tested against
distance fields with a half-diagonal margin, which makes every grid edge
safe; shortcut segments are then checked exactly as swept capsules.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from skimage.graph import MCP_Geometric

from . import geometry as geo
from .geometry import Pose2, Shape
from .world import STATIC_ID, WORLD_H, WORLD_W, WorldState, in_bounds

RESOLUTION = 0.02
CELL_MARGIN = RESOLUTION * math.sqrt(2) / 2 + 1e-6
PENALTY = 1e4
XS = np.arange(int(round(WORLD_W / RESOLUTION)) + 1) * RESOLUTION
YS = np.arange(int(round(WORLD_H / RESOLUTION)) + 1) * RESOLUTION
_GX, _GY = np.meshgrid(XS, YS, indexing="ij")
GRID = np.stack([_GX.ravel(), _GY.ravel()], axis=1)


class MotionFailure(Exception):
    def __init__(self, reason: str, colliders: frozenset[str] = frozenset(), statics: bool = False):
        self.reason, self.colliders, self.statics = reason, frozenset(colliders), statics
        super().__init__(f"{reason}; colliders {sorted(self.colliders)}")


@dataclass(frozen=True)
class BasePath:
    waypoints: tuple[Pose2, ...]
    carry_radius: float = 0.0

    @property
    def length(self) -> float:
        w = self.waypoints
        return sum(math.dist(w[i][:2], w[i + 1][:2]) for i in range(len(w) - 1))

    @property
    def start(self) -> Pose2:
        return self.waypoints[0]

    @property
    def end(self) -> Pose2:
        return self.waypoints[-1]


def carry_radius(state: WorldState) -> float:
    """Radius around the base center that bounds every carried object."""
    r = 0.0
    for arm, h in zip(state.scene.robot.arm_ids, state.held):
        if h is None:
            continue
        a = state.scene.robot.arm(arm)
        m = state.scene.movable(h.obj)
        r = max(r, math.hypot(*a.carry) + math.hypot(*h.grasp) + m.extent)
    return r


def base_blockers(state: WorldState) -> list[tuple[str, Shape]]:
    out = [(oid, s) for oid, s, _ in state.static_bodies + state.joint_bodies]
    return out + list(state.resting_bodies)


def carry_blockers(state: WorldState) -> list[tuple[str, Shape]]:
    return [(oid, s) for oid, s, tall in state.static_bodies + state.joint_bodies if tall]


def segment_colliders(state: WorldState, p: Pose2, q: Pose2, R: float | None = None) -> set[str]:
    """Bodies touched when the base sweeps straight from p to q."""
    R = carry_radius(state) if R is None else R
    hits = set()
    sweep = geo.capsule((p[0], p[1]), (q[0], q[1]), state.scene.robot.base_radius)
    for oid, s in base_blockers(state):
        if geo.collides(sweep, s):
            hits.add(oid)
    if R > 0:
        big = geo.capsule((p[0], p[1]), (q[0], q[1]), R)
        for oid, s in carry_blockers(state):
            if geo.collides(big, s):
                hits.add(oid)
    return hits


def config_colliders(state: WorldState, q: Pose2, R: float | None = None) -> set[str]:
    hits = segment_colliders(state, q, q, R)
    if not in_bounds(state, q):
        hits.add(STATIC_ID)
    return hits


@lru_cache(maxsize=1024)
def _field(shape: Shape) -> np.ndarray:
    f = geo.distance_field(shape, GRID).reshape(_GX.shape)
    f.setflags(write=False)
    return f


@lru_cache(maxsize=64)
def _static_mask(statics, base_radius: float, R: float) -> np.ndarray:
    m = np.zeros(_GX.shape, dtype=bool)
    for _, s, tall in statics:
        m |= _field(s) <= base_radius + CELL_MARGIN
        if R > 0 and tall:
            m |= _field(s) <= R + CELL_MARGIN
    m.setflags(write=False)
    return m


def static_mask(state: WorldState, R: float | None = None) -> np.ndarray:
    """Cells where the base (and carry disc) touches fixed furniture."""
    R = carry_radius(state) if R is None else R
    return _static_mask(state.static_bodies, state.scene.robot.base_radius, round(R, 9))


def _masks(state: WorldState, R: float):
    """Per-cell blocking: static mask plus one mask per non-static body."""
    rb = state.scene.robot.base_radius + CELL_MARGIN
    static = static_mask(state, R)
    others: dict[str, np.ndarray] = {}
    for oid, s, _ in state.joint_bodies:
        others[oid] = others.get(oid, False) | (_field(s) <= rb)
    for oid, s in state.resting_bodies:
        others[oid] = others.get(oid, False) | (_field(s) <= rb)
    if R > 0:
        rc = R + CELL_MARGIN
        for oid, s, tall in state.joint_bodies:
            if tall:
                others[oid] = others[oid] | (_field(s) <= rc)
    return static, others


def _cell(p) -> tuple[int, int]:
    return int(round(p[0] / RESOLUTION)), int(round(p[1] / RESOLUTION))


def _nearby_cells(p, radius: float = 0.08):
    ci, cj = _cell(p)
    k = int(math.ceil(radius / RESOLUTION))
    cells = []
    for i in range(ci - k, ci + k + 1):
        for j in range(cj - k, cj + k + 1):
            if 0 <= i < len(XS) and 0 <= j < len(YS):
                d = math.dist(p[:2], (XS[i], YS[j]))
                if d <= radius:
                    cells.append((d, i, j))
    return [(i, j) for _, i, j in sorted(cells)]


def _connect(state, p: Pose2, free: np.ndarray, R: float):
    for i, j in _nearby_cells(p):
        if free[i, j]:
            c = (float(XS[i]), float(YS[j]), p[2])
            if not segment_colliders(state, p, c, R):
                return (i, j)
    return None


def _heading_profile(pts: list[tuple[float, float]], th0: float, th1: float) -> list[Pose2]:
    seg = [math.dist(pts[i], pts[i + 1]) for i in range(len(pts) - 1)]
    total = sum(seg)
    dth = geo.wrap_angle(th1 - th0)
    out, acc = [], 0.0
    for k, p in enumerate(pts):
        frac = acc / total if total > 0 else 1.0
        out.append((float(p[0]), float(p[1]), geo.wrap_angle(th0 + frac * dth)))
        if k < len(seg):
            acc += seg[k]
    out[0] = (out[0][0], out[0][1], th0)
    out[-1] = (out[-1][0], out[-1][1], th1)
    return out


def _shortcut(state, pts: list, R: float) -> list:
    out = [pts[0]]
    i = 0
    while i < len(pts) - 1:
        j = len(pts) - 1
        while j > i + 1 and segment_colliders(state, pts[i] + (0.0,), pts[j] + (0.0,), R):
            j -= 1
        out.append(pts[j])
        i = j
    return out


def plan_motion(state: WorldState, start: Pose2, goal: Pose2) -> BasePath:
    """Collision-free base path from start to goal with the current attachments."""
    R = carry_radius(state)
    if config_colliders(state, goal, R):
        raise MotionFailure("goal configuration is in collision")
    if config_colliders(state, start, R):
        raise MotionFailure("start configuration is in collision")
    if math.dist(start[:2], goal[:2]) < 1e-12:
        if abs(geo.wrap_angle(goal[2] - start[2])) < 1e-12:
            return BasePath((start,), R)
        return BasePath((start, goal), R)
    if not segment_colliders(state, start, goal, R):
        return BasePath((start, goal), R)

    static, others = _masks(state, R)
    blocked = static.copy()
    for m in others.values():
        blocked |= m
    free = ~blocked
    a, b = _connect(state, start, free, R), _connect(state, goal, free, R)
    if a is not None and b is not None:
        costs = np.where(free, 1.0, np.inf)
        mcp = MCP_Geometric(costs, fully_connected=True)
        cum, _ = mcp.find_costs([a], [b])
        if np.isfinite(cum[b]):
            cells = mcp.traceback(b)
            pts = [start[:2]] + [(float(XS[i]), float(YS[j])) for i, j in cells] + [goal[:2]]
            pts = _shortcut(state, [tuple(map(float, p)) for p in pts], R)
            return BasePath(tuple(_heading_profile(pts, start[2], goal[2])), R)
    raise MotionFailure("no collision-free base path", _blocking_colliders(state, start, goal, static, others, R))


def _blocking_colliders(state, start, goal, static, others, R) -> frozenset[str]:
    """Bodies crossed by the cheapest path that may pass through movable things."""
    passable = ~static
    a = _nearest_cell(start, passable)
    b = _nearest_cell(goal, passable)
    if a is None or b is None:
        return frozenset()
    costs = np.ones(static.shape)
    for m in others.values():
        costs = np.where(m, costs + PENALTY, costs)
    costs = np.where(static, np.inf, costs)
    mcp = MCP_Geometric(costs, fully_connected=True)
    cum, _ = mcp.find_costs([a], [b])
    if not np.isfinite(cum[b]):
        return frozenset()
    cells = mcp.traceback(b)
    hits = set()
    for i, j in cells:
        for oid, m in others.items():
            if m[i, j]:
                hits.add(oid)
    return frozenset(hits)


def _nearest_cell(p, mask):
    for i, j in _nearby_cells(p, 0.1):
        if mask[i, j]:
            return (i, j)
    return None


def validate_path(state: WorldState, path: BasePath) -> set[str]:
    """Exact replay check of a base path with the state's attachments."""
    hits = set()
    w = path.waypoints
    for k in range(len(w)):
        hits |= config_colliders(state, w[k], path.carry_radius)
        if k + 1 < len(w):
            hits |= segment_colliders(state, w[k], w[k + 1], path.carry_radius)
    return hits

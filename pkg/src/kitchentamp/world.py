"""Top-down 2D kitchen: scene layout, value-typed world state, symbolic projection.

Coordinates are meters and radians with +y pointing toward the back wall.
Movable poses are stored in the frame of their support region, so anything
resting in the drawer rides along when the drawer slides.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from . import geometry as geo
from .geometry import Point, Pose2, Shape
from .pddl import (
    JOINT,
    MOVABLE,
    ROBOT_PART,
    SPACE,
    SURFACE,
    Literal,
    SymbolicState,
    SymbolTable,
)

WORLD_W, WORLD_H = 4.0, 3.0
STATIC_ID = "static"  # reserved collider id for fixed furniture and walls
PLACE_INSET = 0.01

REVOLUTE, PRISMATIC, KNOB = "revolute-door", "prismatic-drawer", "knob"
EASY, OBSTACLES = "easy", "more-obstacles"
SINGLE, DUAL = "single-arm", "dual-arm"


class WorldError(Exception):
    pass


class OutOfRange(WorldError):
    def __init__(self, joint: str, value: float, lo: float, hi: float):
        self.joint, self.value = joint, value
        super().__init__(f"{joint}: value {value} outside [{lo}, {hi}]")


# --------------------------------------------------------------------------
# scene description


@dataclass(frozen=True)
class StaticBody:
    id: str
    shape: Shape
    tall: bool


@dataclass(frozen=True)
class Region:
    id: str
    kind: str  # surface or space
    bounds: tuple[float, float, float, float]  # in the frame below
    frame: str | None = None  # joint whose pose carries this region

    @property
    def local_shape(self) -> Shape:
        return geo.rect(*self.bounds)


@dataclass(frozen=True)
class Joint:
    id: str
    kind: str
    anchor: Point
    angle0: float
    lo: float
    hi: float
    body: Shape | None  # in joint frame; None for knobs
    handle: Point  # in joint frame
    sign: float = 1.0  # rotation direction, or unused for drawers
    axis: Point = (1.0, 0.0)
    open_threshold: float = 0.5
    on_threshold: float = 0.9
    cover: Shape | None = None  # static region that hides the drawer's contents when closed

    def pose(self, value: float) -> Pose2:
        if self.kind == PRISMATIC:
            return (self.anchor[0] + self.axis[0] * value, self.anchor[1] + self.axis[1] * value, self.angle0)
        return (self.anchor[0], self.anchor[1], self.angle0 + self.sign * value)

    def fraction(self, value: float) -> float:
        return (value - self.lo) / (self.hi - self.lo)

    @property
    def tall(self) -> bool:
        return self.kind == REVOLUTE


@dataclass(frozen=True)
class Movable:
    id: str
    footprint: Shape  # centered at its own origin
    lid: bool = False  # covers whatever it rests on, so pouring onto that region is blocked

    @property
    def extent(self) -> float:
        return max(math.hypot(*v) for v in self.footprint.verts) + self.footprint.radius


@dataclass(frozen=True)
class Arm:
    id: str
    r_min: float
    r_max: float
    center: float  # window center relative to heading
    half_width: float
    carry: Point  # carry point in the base frame
    link_radius: float = 0.015
    gripper_radius: float = 0.025

    def in_reach(self, q: Pose2, p: Point) -> bool:
        dx, dy = p[0] - q[0], p[1] - q[1]
        r = math.hypot(dx, dy)
        if not (self.r_min <= r <= self.r_max):
            return False
        bearing = geo.wrap_angle(math.atan2(dy, dx) - q[2] - self.center)
        return abs(bearing) <= self.half_width


@dataclass(frozen=True)
class RobotModel:
    base_radius: float
    arms: tuple[Arm, ...]

    def arm(self, arm_id: str) -> Arm:
        for a in self.arms:
            if a.id == arm_id:
                return a
        raise KeyError(arm_id)

    @property
    def arm_ids(self) -> tuple[str, ...]:
        return tuple(a.id for a in self.arms)


@dataclass(frozen=True)
class Variant:
    layout: str = EASY
    arms: str = SINGLE

    @property
    def name(self) -> str:
        return f"{self.layout}/{self.arms}"

    @property
    def slug(self) -> str:
        short = {EASY: "easy", OBSTACLES: "obstacles", SINGLE: "single", DUAL: "dual"}
        return f"{short[self.layout]}-{short[self.arms]}"

    @classmethod
    def parse(cls, text: str) -> "Variant":
        t = text.strip().lower().replace("_", "-").replace("/", "-")
        layout = OBSTACLES if ("obstacle" in t or t.startswith("more")) else EASY
        arms = DUAL if "dual" in t else SINGLE
        if not any(k in t for k in ("easy", "obstacle", "more")):
            raise ValueError(f"unknown variant {text!r}")
        return cls(layout, arms)


VARIANTS = (Variant(EASY, SINGLE), Variant(EASY, DUAL), Variant(OBSTACLES, SINGLE), Variant(OBSTACLES, DUAL))


@dataclass(frozen=True)
class Scene:
    statics: tuple[StaticBody, ...]
    regions: tuple[Region, ...]
    joints: tuple[Joint, ...]
    movables: tuple[Movable, ...]
    robot: RobotModel
    variant: Variant = Variant()

    @geo.lazy
    def _index(self):
        return (
            {r.id: r for r in self.regions},
            {j.id: j for j in self.joints},
            {m.id: m for m in self.movables},
            {j.id: i for i, j in enumerate(self.joints)},
            {m.id: i for i, m in enumerate(self.movables)},
        )

    def region(self, rid: str) -> Region:
        return self._index[0][rid]

    def joint(self, jid: str) -> Joint:
        return self._index[1][jid]

    def movable(self, mid: str) -> Movable:
        return self._index[2][mid]

    def joint_index(self, jid: str) -> int:
        return self._index[3][jid]

    def movable_index(self, mid: str) -> int:
        return self._index[4][mid]

    @property
    def surfaces(self) -> tuple[Region, ...]:
        return tuple(r for r in self.regions if r.kind == SURFACE)

    @property
    def spaces(self) -> tuple[Region, ...]:
        return tuple(r for r in self.regions if r.kind == SPACE)

    def kind_of(self, oid: str) -> str:
        regions, joints, movables = self._index[:3]
        if oid in movables:
            return MOVABLE
        if oid in joints:
            return JOINT
        if oid in regions:
            return regions[oid].kind
        if oid in self.robot.arm_ids:
            return ROBOT_PART
        raise KeyError(oid)

    @geo.lazy
    def symbols(self) -> SymbolTable:
        objs = {m.id: MOVABLE for m in self.movables}
        objs.update({r.id: r.kind for r in self.regions})
        objs.update({j.id: JOINT for j in self.joints})
        objs.update({a: ROBOT_PART for a in self.robot.arm_ids})
        return SymbolTable(objs)

    @property
    def planning_objects(self) -> tuple[str, ...]:
        """Everything the language model may name: all objects except robot parts."""
        return tuple(sorted([m.id for m in self.movables] + [r.id for r in self.regions] + [j.id for j in self.joints]))


# --------------------------------------------------------------------------
# world state


@dataclass(frozen=True)
class Held:
    obj: str
    grasp: Point  # gripper point in the object frame
    rel_theta: float  # object heading relative to the base while carried


@dataclass(frozen=True)
class Resting:
    support: str
    pose: Pose2  # in the support region's frame


@dataclass(frozen=True)
class WorldState:
    scene: Scene = field(repr=False, compare=False)
    base: Pose2
    joint_values: tuple[float, ...]
    movables: tuple[Resting | None, ...]  # None while held
    held: tuple[Held | None, ...]  # one slot per arm
    sprinkled: frozenset[tuple[str, str]] = frozenset()

    # ---- lookups
    def joint_value(self, jid: str) -> float:
        return self.joint_values[self.scene.joint_index(jid)]

    def resting(self, mid: str) -> Resting | None:
        return self.movables[self.scene.movable_index(mid)]

    def holder(self, mid: str) -> str | None:
        for arm, h in zip(self.scene.robot.arm_ids, self.held):
            if h is not None and h.obj == mid:
                return arm
        return None

    def held_by(self, arm: str) -> Held | None:
        return self.held[self.scene.robot.arm_ids.index(arm)]

    def frame_pose(self, frame: str | None) -> Pose2:
        if frame is None:
            return (0.0, 0.0, 0.0)
        return self.scene.joint(frame).pose(self.joint_value(frame))

    def region_shape(self, rid: str) -> Shape:
        r = self.scene.region(rid)
        return r.local_shape.moved(self.frame_pose(r.frame))

    def region_frame(self, rid: str) -> Pose2:
        return self.frame_pose(self.scene.region(rid).frame)

    def movable_pose(self, mid: str, base: Pose2 | None = None) -> Pose2:
        """World pose; held objects ride at their arm's carry point."""
        rest = self.resting(mid)
        if rest is not None:
            return geo.compose(self.region_frame(rest.support), rest.pose)
        arm = self.holder(mid)
        return carry_pose(self.scene, base or self.base, arm, self.held_by(arm))

    def movable_shape(self, mid: str, base: Pose2 | None = None) -> Shape:
        return self.scene.movable(mid).footprint.moved(self.movable_pose(mid, base))

    def joint_shape(self, jid: str, value: float | None = None) -> Shape | None:
        j = self.scene.joint(jid)
        if j.body is None:
            return None
        v = self.joint_value(jid) if value is None else value
        return j.body.moved(j.pose(v))

    def handle_point(self, jid: str, value: float | None = None) -> Point:
        j = self.scene.joint(jid)
        v = self.joint_value(jid) if value is None else value
        return geo.transform(j.pose(v), j.handle)

    # ---- bodies grouped by who may collide with them
    @geo.lazy
    def static_bodies(self) -> tuple[tuple[str, Shape, bool], ...]:
        return tuple((STATIC_ID, s.shape, s.tall) for s in self.scene.statics)

    @geo.lazy
    def joint_bodies(self) -> tuple[tuple[str, Shape, bool], ...]:
        out = []
        for j in self.scene.joints:
            s = self.joint_shape(j.id)
            if s is not None:
                out.append((j.id, s, j.tall))
        return tuple(out)

    @geo.lazy
    def covers(self) -> tuple[tuple[str, Shape], ...]:
        return tuple((j.id, j.cover) for j in self.scene.joints if j.cover is not None)

    @geo.lazy
    def resting_bodies(self) -> tuple[tuple[str, Shape], ...]:
        return tuple(
            (m.id, self.movable_shape(m.id)) for m, r in zip(self.scene.movables, self.movables) if r is not None
        )

    # ---- transitions (all return new states)
    def _keep(self, new: "WorldState", *names: str) -> "WorldState":
        # reuse cached bodies that the transition leaves unchanged
        for n in names:
            if n in self.__dict__:
                new.__dict__[n] = self.__dict__[n]
        return new

    def with_base(self, base: Pose2) -> "WorldState":
        new = replace(self, base=tuple(float(c) for c in base))
        return self._keep(new, "static_bodies", "joint_bodies", "covers", "resting_bodies")

    def set_joint(self, jid: str, value: float) -> "WorldState":
        j = self.scene.joint(jid)
        tol = 1e-12
        if not (j.lo - tol <= value <= j.hi + tol):
            raise OutOfRange(jid, value, j.lo, j.hi)
        value = min(max(value, j.lo), j.hi)
        vals = list(self.joint_values)
        vals[self.scene.joint_index(jid)] = float(value)
        return self._keep(replace(self, joint_values=tuple(vals)), "static_bodies", "covers")

    def grasp(self, arm: str, mid: str, grasp: Point) -> "WorldState":
        if self.held_by(arm) is not None:
            raise WorldError(f"{arm} arm is not empty")
        if self.resting(mid) is None:
            raise WorldError(f"{mid} is already held")
        pose = self.movable_pose(mid)
        held = list(self.held)
        held[self.scene.robot.arm_ids.index(arm)] = Held(mid, grasp, geo.wrap_angle(pose[2] - self.base[2]))
        movs = list(self.movables)
        movs[self.scene.movable_index(mid)] = None
        return self._keep(
            replace(self, held=tuple(held), movables=tuple(movs)), "static_bodies", "joint_bodies", "covers"
        )

    def release(self, arm: str, region: str, world_pose: Pose2) -> "WorldState":
        h = self.held_by(arm)
        if h is None:
            raise WorldError(f"{arm} arm holds nothing")
        local = geo.compose(geo.invert(self.region_frame(region)), world_pose)
        held = list(self.held)
        held[self.scene.robot.arm_ids.index(arm)] = None
        movs = list(self.movables)
        movs[self.scene.movable_index(h.obj)] = Resting(region, local)
        return self._keep(
            replace(self, held=tuple(held), movables=tuple(movs)), "static_bodies", "joint_bodies", "covers"
        )

    def sprinkle(self, obj: str, region: str) -> "WorldState":
        new = replace(self, sprinkled=self.sprinkled | {(obj, region)})
        return self._keep(new, "static_bodies", "joint_bodies", "covers", "resting_bodies")


def carry_pose(scene: Scene, base: Pose2, arm: str, held: Held) -> Pose2:
    a = scene.robot.arm(arm)
    c = geo.transform(base, a.carry)
    grip = (c[0], c[1], base[2] + held.rel_theta)
    return geo.compose(grip, (-held.grasp[0], -held.grasp[1], 0.0))


def held_pose_at(gripper: Point, theta: float, grasp: Point) -> Pose2:
    """Object pose when the gripper is at ``gripper`` and the object faces ``theta``."""
    return geo.compose((gripper[0], gripper[1], theta), (-grasp[0], -grasp[1], 0.0))


# --------------------------------------------------------------------------
# collision queries


def base_shape(state: WorldState, q: Pose2) -> Shape:
    return geo.disc(q[0], q[1], state.scene.robot.base_radius)


def attachments(state: WorldState, q: Pose2) -> list[tuple[str, Shape]]:
    out = []
    for arm, h in zip(state.scene.robot.arm_ids, state.held):
        if h is not None:
            pose = carry_pose(state.scene, q, arm, h)
            out.append((h.obj, state.scene.movable(h.obj).footprint.moved(pose)))
    return out


def robot_collisions(state: WorldState, q: Pose2, include_attachments: bool = True) -> set[str]:
    """Ids touching the base or (if any) the carried objects at base pose ``q``."""
    hits = set()
    b = base_shape(state, q)
    for oid, s, _ in state.static_bodies + state.joint_bodies:
        if geo.collides(b, s):
            hits.add(oid)
    for oid, s in state.resting_bodies:
        if geo.collides(b, s):
            hits.add(oid)
    if include_attachments:
        for _, a in attachments(state, q):
            for oid, s, tall in state.static_bodies + state.joint_bodies:
                if tall and geo.collides(a, s):
                    hits.add(oid)
    return hits


def in_bounds(state: WorldState, q: Pose2) -> bool:
    r = state.scene.robot.base_radius
    return r <= q[0] <= WORLD_W - r and r <= q[1] <= WORLD_H - r


def arm_collisions(
    state: WorldState,
    q: Pose2,
    arm: str,
    point: Point,
    ignore: Iterable[str] = (),
    joint_override: dict[str, Shape | None] | None = None,
) -> set[str]:
    """Ids touching the arm link or gripper reaching from base ``q`` to ``point``."""
    a = state.scene.robot.arm(arm)
    ignore = set(ignore)
    link = geo.capsule((q[0], q[1]), point, a.link_radius)
    grip = geo.disc(point[0], point[1], a.gripper_radius)
    hits = set()
    joint_bodies = state.joint_bodies
    if joint_override:
        joint_bodies = tuple(
            (oid, joint_override.get(oid, s), tall) for oid, s, tall in joint_bodies
        )
    for oid, s, tall in state.static_bodies + joint_bodies:
        if not tall or oid in ignore or s is None:
            continue
        if geo.collides(link, s) or geo.collides(grip, s):
            hits.add(oid)
    for oid, s in state.resting_bodies:
        if oid in ignore:
            continue
        if geo.collides(link, s) or geo.collides(grip, s):
            hits.add(oid)
    for oid, s in state.covers:
        if oid not in ignore and geo.collides(grip, s):
            hits.add(oid)
    return hits


def object_collisions(state: WorldState, mid: str, shape: Shape) -> set[str]:
    """Ids touching a movable placed (or held) at ``shape``."""
    hits = set()
    for oid, s, tall in state.static_bodies + state.joint_bodies:
        if tall and geo.collides(shape, s):
            hits.add(oid)
    for oid, s in state.resting_bodies:
        if oid != mid and geo.collides(shape, s):
            hits.add(oid)
    for oid, s in state.covers:
        if geo.collides(shape, s):
            hits.add(oid)
    return hits


def shape_of(state: WorldState, body_id: str) -> Shape:
    if body_id == "robot":
        return base_shape(state, state.base)
    kind = state.scene.kind_of(body_id)
    if kind == MOVABLE:
        return state.movable_shape(body_id)
    if kind == JOINT:
        s = state.joint_shape(body_id)
        if s is None:
            h = state.handle_point(body_id)
            return geo.disc(h[0], h[1], 0.02)
        return s
    return state.region_shape(body_id)


def collides(state: WorldState, body_a: str | Shape, body_b: str | Shape) -> bool:
    a = body_a if isinstance(body_a, Shape) else shape_of(state, body_a)
    b = body_b if isinstance(body_b, Shape) else shape_of(state, body_b)
    return geo.collides(a, b)


def state_collisions(state: WorldState) -> list[str]:
    """Every interpenetration in a committed state; empty for valid states."""
    problems = []
    hits = robot_collisions(state, state.base)
    if hits:
        problems.append(f"robot touches {sorted(hits)}")
    rest = state.resting_bodies
    for i, (oid, s) in enumerate(rest):
        for oid2, s2 in rest[i + 1:]:
            if geo.collides(s, s2):
                problems.append(f"{oid} overlaps {oid2}")
        for jid, js, tall in state.joint_bodies:
            if tall and geo.collides(s, js):
                problems.append(f"{oid} overlaps {jid}")
        for jid, c in state.covers:
            support = state.resting(oid).support
            if state.scene.region(support).frame == jid:
                continue  # covered contents are simply inside the closed drawer
            if geo.collides(s, c):
                problems.append(f"{oid} overlaps cover of {jid}")
    return problems


# --------------------------------------------------------------------------
# symbolic projection


def relations(state: WorldState) -> SymbolicState:
    lits = set()
    scene = state.scene
    for m, r in zip(scene.movables, state.movables):
        if r is not None:
            pred = "On" if scene.region(r.support).kind == SURFACE else "In"
            lits.add(Literal(pred, (m.id, r.support)))
    for arm, h in zip(scene.robot.arm_ids, state.held):
        if h is None:
            lits.add(Literal("HandEmpty", (arm,)))
        else:
            lits.add(Literal("Holding", (arm, h.obj)))
            lits.add(Literal("Picked", (h.obj,)))
    for j, v in zip(scene.joints, state.joint_values):
        f = j.fraction(v)
        if j.kind == KNOB:
            lits.add(Literal("TurnedOn" if f >= j.on_threshold - 1e-12 else "TurnedOff", (j.id,)))
        else:
            lits.add(Literal("Opened" if f >= j.open_threshold - 1e-12 else "Closed", (j.id,)))
    for obj, region in state.sprinkled:
        lits.add(Literal("Sprinkled", (obj, region)))
    return SymbolicState(frozenset(lits))


def english(name: str) -> str:
    return name.replace("_", " ")


def describe(lit: Literal) -> str:
    a = [english(x) for x in lit.args]
    return {
        "On": lambda: f"the {a[0]} is on the {a[1]}",
        "In": lambda: f"the {a[0]} is in the {a[1]}",
        "Holding": lambda: f"the {a[0]} arm is holding the {a[1]}",
        "Picked": lambda: f"the {a[0]} has been picked up",
        "HandEmpty": lambda: f"the {a[0]} hand is empty",
        "Opened": lambda: f"the {a[0]} is open",
        "Closed": lambda: f"the {a[0]} is closed",
        "TurnedOn": lambda: f"the {a[0]} is turned on",
        "TurnedOff": lambda: f"the {a[0]} is turned off",
        "Sprinkled": lambda: f"the {a[0]} has been sprinkled onto the {a[1]}",
    }[lit.predicate]()


@dataclass(frozen=True)
class ObservationBundle:
    relations_text: tuple[str, ...]
    literals: SymbolicState
    render: str  # SVG document

    @property
    def text(self) -> str:
        return "; ".join(self.relations_text) if self.relations_text else "nothing"


def observe(state: WorldState) -> ObservationBundle:
    from .render import render_svg

    lits = relations(state)
    ordered = sorted(lits.literals)
    return ObservationBundle(tuple(describe(l) for l in ordered), lits, render_svg(state))


# --------------------------------------------------------------------------
# scene generation

ARM_REACH = (0.2, 0.85)
ARM_HALF_WIDTH = math.radians(80)


def _robot(variant: Variant) -> RobotModel:
    left = Arm("left", *ARM_REACH, math.radians(40), ARM_HALF_WIDTH, (0.05, 0.2))
    right = Arm("right", *ARM_REACH, math.radians(-40), ARM_HALF_WIDTH, (0.05, -0.2))
    return RobotModel(0.22, (left,) if variant.arms == SINGLE else (left, right))


def _layout() -> tuple[tuple[StaticBody, ...], tuple[Region, ...], tuple[Joint, ...], tuple[Movable, ...]]:
    R = geo.rect
    statics = (
        # walls just outside the floor
        StaticBody("wall_west", R(-0.1, -0.1, 0.0, 3.1), True),
        StaticBody("wall_east", R(4.0, -0.1, 4.1, 3.1), True),
        StaticBody("wall_south", R(0.0, -0.1, 4.0, 0.0), True),
        StaticBody("wall_north", R(0.0, 3.0, 4.0, 3.1), True),
        # fridge carcass, open to the south
        StaticBody("fridge_west", R(0.0, 2.2, 0.03, 3.0), True),
        StaticBody("fridge_east", R(0.77, 2.2, 0.8, 3.0), True),
        StaticBody("counter", R(0.8, 2.4, 4.0, 3.0), False),
        StaticBody("drawer_unit", R(0.0, 0.6, 0.6, 1.2), False),
        # cabinet on the east wall, open to the west
        StaticBody("cabinet_north", R(3.4, 1.97, 4.0, 2.0), True),
        StaticBody("cabinet_south", R(3.4, 1.2, 4.0, 1.23), True),
        StaticBody("cabinet_plinth", R(3.42, 1.23, 4.0, 1.97), False),
    )
    regions = (
        Region("counter", SURFACE, (0.85, 2.45, 1.55, 2.95)),
        Region("chopping_board", SURFACE, (1.6, 2.5, 1.95, 2.9)),
        Region("pot", SURFACE, (2.05, 2.5, 2.4, 2.85)),
        Region("left_burner", SURFACE, (2.45, 2.5, 2.7, 2.75)),
        Region("right_burner", SURFACE, (2.75, 2.5, 3.0, 2.75)),
        Region("sink", SURFACE, (3.3, 2.5, 3.6, 2.8)),
        Region("fridge_shelf", SURFACE, (0.07, 2.25, 0.37, 2.93)),
        Region("cabinet_shelf", SURFACE, (3.45, 1.25, 3.93, 1.95)),
        Region("fridge_interior", SPACE, (0.42, 2.25, 0.73, 2.93)),
        Region("drawer_interior", SPACE, (0.04, -0.18, 0.46, 0.18), frame="drawer"),
    )
    half_pi = math.pi / 2
    panel = lambda L: geo.rect(0.0, -0.015, L, 0.015)  # noqa: E731
    joints = (
        Joint("fridge_door", REVOLUTE, (0.03, 2.18), 0.0, 0.0, half_pi, panel(0.76), (0.79, 0.0), sign=-1.0),
        Joint("cabinet_left_door", REVOLUTE, (3.4, 2.0), -half_pi, 0.0, half_pi, panel(0.38), (0.34, 0.0), sign=-1.0),
        Joint("cabinet_right_door", REVOLUTE, (3.4, 1.2), half_pi, 0.0, half_pi, panel(0.38), (0.34, 0.0), sign=1.0),
        Joint(
            "drawer", PRISMATIC, (0.05, 0.9), 0.0, 0.0, 0.45, geo.rect(0.0, -0.22, 0.5, 0.22), (0.55, 0.0),
            cover=geo.rect(0.0, 0.6, 0.57, 1.2),
        ),
        Joint("stove_knob", KNOB, (2.6, 2.42), 0.0, 0.0, half_pi, None, (0.0, 0.0)),
        Joint("faucet_handle", KNOB, (3.7, 2.42), 0.0, 0.0, half_pi, None, (0.0, 0.0)),
    )
    movables = (
        Movable("chicken_leg", geo.box(0.14, 0.06)),
        Movable("cabbage", geo.disc(0.0, 0.0, 0.06)),
        Movable("salt_shaker", geo.disc(0.0, 0.0, 0.03)),
        Movable("pepper_shaker", geo.disc(0.0, 0.0, 0.03)),
        Movable("pot_lid", geo.disc(0.0, 0.0, 0.15), lid=True),
    )
    return statics, regions, joints, movables


START_BASE = (2.0, 1.2, math.pi / 2)
DOORS = ("fridge_door", "cabinet_left_door", "cabinet_right_door", "drawer")


def generate_scene(variant: Variant, seed: int = 0) -> tuple[Scene, WorldState]:
    statics, regions, joints, movables = _layout()
    scene = Scene(statics, regions, joints, movables, _robot(variant), variant)
    rng = np.random.default_rng([seed, 1729])
    jitter = rng.uniform(0.8, 1.0, size=len(DOORS))
    values = []
    for j in joints:
        if variant.layout == EASY and j.id in DOORS:
            values.append(float(j.lo + jitter[DOORS.index(j.id)] * (j.hi - j.lo)))
        else:
            values.append(float(j.lo))
    lid = Resting("counter", (1.2, 2.7, 0.0)) if variant.layout == EASY else Resting("pot", (2.225, 2.675, 0.0))
    rest = {
        "chicken_leg": Resting("fridge_shelf", (0.22, 2.45, 0.0)),
        "cabbage": Resting("drawer_interior", (0.38, 0.0, 0.0)),
        "salt_shaker": Resting("cabinet_shelf", (3.62, 1.8, 0.0)),
        "pepper_shaker": Resting("cabinet_shelf", (3.62, 1.4, 0.0)),
        "pot_lid": lid,
    }
    state = WorldState(
        scene,
        START_BASE,
        tuple(values),
        tuple(rest[m.id] for m in movables),
        tuple(None for _ in scene.robot.arms),
    )
    return scene, state


# --------------------------------------------------------------------------
# scene JSON


def _shape_json(s: Shape) -> dict:
    return {"verts": [list(v) for v in s.verts], "radius": s.radius}


def _shape_from(d: dict) -> Shape:
    return Shape(tuple(tuple(v) for v in d["verts"]), d["radius"])


def scene_to_json(state: WorldState) -> str:
    sc = state.scene
    doc = {
        "units": "meters, radians",
        "bounds": [WORLD_W, WORLD_H],
        "variant": {"layout": sc.variant.layout, "arms": sc.variant.arms},
        "statics": [{"id": s.id, "shape": _shape_json(s.shape), "tall": s.tall} for s in sc.statics],
        "regions": [
            {"id": r.id, "kind": r.kind, "bounds": list(r.bounds), "frame": r.frame} for r in sc.regions
        ],
        "joints": [
            {
                "id": j.id, "kind": j.kind, "anchor": list(j.anchor), "angle0": j.angle0,
                "range": [j.lo, j.hi], "sign": j.sign, "axis": list(j.axis),
                "body": _shape_json(j.body) if j.body else None, "handle": list(j.handle),
                "open_threshold": j.open_threshold, "on_threshold": j.on_threshold,
                "cover": _shape_json(j.cover) if j.cover else None,
                "value": state.joint_value(j.id),
            }
            for j in sc.joints
        ],
        "movables": [
            {
                "id": m.id, "footprint": _shape_json(m.footprint), "lid": m.lid,
                "support": r.support if r else None, "pose": list(r.pose) if r else None,
            }
            for m, r in zip(sc.movables, state.movables)
        ],
        "robot": {
            "base_radius": sc.robot.base_radius,
            "config": list(state.base),
            "arms": [
                {
                    "id": a.id, "reach": [a.r_min, a.r_max], "window_center": a.center,
                    "window_half_width": a.half_width, "carry": list(a.carry),
                    "holding": state.held_by(a.id).obj if state.held_by(a.id) else None,
                }
                for a in sc.robot.arms
            ],
        },
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def scene_from_json(text: str) -> tuple[Scene, WorldState]:
    d = json.loads(text)
    statics = tuple(StaticBody(s["id"], _shape_from(s["shape"]), s["tall"]) for s in d["statics"])
    regions = tuple(Region(r["id"], r["kind"], tuple(r["bounds"]), r["frame"]) for r in d["regions"])
    joints = tuple(
        Joint(
            j["id"], j["kind"], tuple(j["anchor"]), j["angle0"], j["range"][0], j["range"][1],
            _shape_from(j["body"]) if j["body"] else None, tuple(j["handle"]), j["sign"], tuple(j["axis"]),
            j["open_threshold"], j["on_threshold"], _shape_from(j["cover"]) if j["cover"] else None,
        )
        for j in d["joints"]
    )
    movables = tuple(Movable(m["id"], _shape_from(m["footprint"]), m.get("lid", False)) for m in d["movables"])
    arms = tuple(
        Arm(a["id"], a["reach"][0], a["reach"][1], a["window_center"], a["window_half_width"], tuple(a["carry"]))
        for a in d["robot"]["arms"]
    )
    variant = Variant(d["variant"]["layout"], d["variant"]["arms"])
    scene = Scene(statics, regions, joints, movables, RobotModel(d["robot"]["base_radius"], arms), variant)
    if any(a["holding"] for a in d["robot"]["arms"]):
        raise WorldError("scene files describe resting states only")
    state = WorldState(
        scene,
        tuple(d["robot"]["config"]),
        tuple(j["value"] for j in d["joints"]),
        tuple(Resting(m["support"], tuple(m["pose"])) for m in d["movables"]),
        tuple(None for _ in arms),
    )
    return scene, state

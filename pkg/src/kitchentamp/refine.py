"""Skeleton refinement: samplers, object reduction and the two solve modes.

A step of a skeleton is refined by sampling its continuous parameters
(placement pose, grasp, base configuration), checking the manipulation
against every body in the world, and planning a base path to it. Colliders
from failed attempts feed the object set of the next round.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from . import geometry as geo
from .geometry import Point, Pose2
from .motion import (
    RESOLUTION,
    XS,
    YS,
    BasePath,
    MotionFailure,
    carry_radius,
    static_mask,
    config_colliders,
    plan_motion,
)
from .pddl import (
    JOINT,
    MOVABLE,
    Domain,
    GroundedAction,
    Literal,
    PartialAction,
    SymbolicState,
    SymbolTable,
    holds,
    kitchen_domain,
    unmet_preconditions,
)
from .taskplan import candidate_bindings, diverse_skeletons, effects_of
from .world import (
    PLACE_INSET,
    PRISMATIC,
    STATIC_ID,
    WorldState,
    arm_collisions,
    in_bounds,
    object_collisions,
    relations,
)

N_TAMP = 3
SWEEP_STEP = math.radians(2.0)
PARKING = ("counter",)

NO_SKELETON = "NoSkeletonFound"
BUDGET = "RefinementBudgetExhausted"
SEMANTIC = "SemanticallyImpossible"


@dataclass(frozen=True)
class SamplerBudgets:
    pose_attempts: int = 20
    grasp_attempts: int = 10
    ik_attempts: int = 30
    motion_attempts: int = 1
    skeleton_limit: int = 12
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("pose_attempts", "grasp_attempts", "ik_attempts", "motion_attempts", "skeleton_limit"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")


@dataclass(frozen=True)
class BaseStep:
    path: BasePath

    @property
    def end(self) -> Pose2:
        return self.path.end


@dataclass(frozen=True)
class ManipStep:
    action: GroundedAction
    arm: str
    config: Pose2
    point: Point
    grasp: Point | None = None
    pose: Pose2 | None = None  # placement pose in the world frame
    value: float | None = None  # joint target


Step = BaseStep | ManipStep


@dataclass(frozen=True)
class Solution:
    plan: tuple[GroundedAction, ...]
    trajectories: tuple[Step, ...]
    colliders_seen: frozenset[str] = frozenset()
    rounds: int = 1
    skeletons_tried: int = 0

    @property
    def task_actions(self) -> tuple[GroundedAction, ...]:
        return tuple(a for a in self.plan if a.name != "move-base")


@dataclass
class RefinementFailure(Exception):
    reason: str
    colliders: frozenset[str] = frozenset()
    diagnostics: list = field(default_factory=list)
    rounds: int = 0

    def __post_init__(self):
        super().__init__(f"{self.reason}; colliders {sorted(self.colliders)}")

    def __str__(self) -> str:
        return f"{self.reason}; colliders {sorted(self.colliders)}"


class BudgetExhausted(Exception):
    def __init__(self, site: str, colliders: Iterable[str] = ()):
        self.site, self.colliders = site, frozenset(colliders)
        super().__init__(f"{site} budget exhausted")


class Tracer:
    """Collects one record per sampler call when enabled."""

    def __init__(self, enabled: bool = False):
        self.enabled = enabled
        self.records: list[dict] = []

    def emit(self, **rec):
        if self.enabled:
            self.records.append(rec)


class _Counter:
    def __init__(self, budgets: SamplerBudgets):
        self.limits = {
            "pose": budgets.pose_attempts,
            "grasp": budgets.grasp_attempts,
            "ik": budgets.ik_attempts,
            "motion": budgets.motion_attempts,
        }
        self.used = {k: 0 for k in self.limits}

    def take(self, site: str) -> bool:
        if self.used[site] >= self.limits[site]:
            return False
        self.used[site] += 1
        return True


# --------------------------------------------------------------------------
# object reduction


def reduce_objects(
    all_objects: Iterable[str], state: WorldState, goal: Literal | Sequence[Literal], memory: Iterable[str] = ()
) -> frozenset[str]:
    goals = [goal] if isinstance(goal, Literal) else list(goal)
    universe = set(all_objects)
    reduced = {a for g in goals for a in g.args if a in universe}
    reduced |= {h.obj for h in state.held if h is not None}
    reduced |= {m for m in memory if m in universe}
    return frozenset(reduced)


def planning_table(state: WorldState, reduced: Iterable[str]) -> SymbolTable:
    """Symbols the skeleton search may use: the reduced set, supports it needs, parking."""
    scene = state.scene
    keep = set(reduced)
    for oid in list(keep):
        if scene.kind_of(oid) == MOVABLE:
            rest = state.resting(oid)
            if rest is not None:
                keep.add(rest.support)
    keep |= set(PARKING)
    keep |= set(scene.robot.arm_ids)
    return scene.symbols.restrict(keep)


def restrict_state(lits: SymbolicState, table: SymbolTable) -> SymbolicState:
    return SymbolicState(frozenset(l for l in lits.literals if all(a in table.objects for a in l.args)))


# --------------------------------------------------------------------------
# samplers


def sample_pose(state: WorldState, region: str, body: str, rng: np.random.Generator) -> Pose2 | None:
    """One rejection-sampling draw of a collision-free placement; None on rejection."""
    mov = state.scene.movable(body)
    shape = state.region_shape(region)
    theta = float(rng.uniform(-math.pi, math.pi))
    local = mov.footprint.moved((0.0, 0.0, theta))
    lx0, ly0, lx1, ly1 = local.aabb
    x0, y0, x1, y1 = shape.aabb
    lo_x, hi_x = x0 - lx0 + PLACE_INSET, x1 - lx1 - PLACE_INSET
    lo_y, hi_y = y0 - ly0 + PLACE_INSET, y1 - ly1 - PLACE_INSET
    if lo_x > hi_x or lo_y > hi_y:
        return None
    pose = (float(rng.uniform(lo_x, hi_x)), float(rng.uniform(lo_y, hi_y)), theta)
    placed = mov.footprint.moved(pose)
    if not geo.contains_shape(shape, placed, PLACE_INSET):
        return None
    return pose


def sample_grasp(state: WorldState, body: str, rng: np.random.Generator) -> Point:
    """Gripper point in the object frame; joints grasp at their handle."""
    if state.scene.kind_of(body) == JOINT:
        return state.scene.joint(body).handle
    fp = state.scene.movable(body).footprint
    if len(fp.verts) == 1:
        r = min(fp.radius * 0.5, 0.02)
        a = rng.uniform(0, 2 * math.pi)
        d = r * math.sqrt(rng.uniform())
        return (float(d * math.cos(a)), float(d * math.sin(a)))
    x0, y0, x1, y1 = fp.aabb
    return (float(rng.uniform(x0 * 0.5, x1 * 0.5)), float(rng.uniform(y0 * 0.3, y1 * 0.3)))


def _ik_cells(state: WorldState, arm: str, point: Point, also: Sequence[Point] = ()):
    a = state.scene.robot.arm(arm)
    static = static_mask(state)
    ci, cj = int(round(point[0] / RESOLUTION)), int(round(point[1] / RESOLUTION))
    k = int(math.ceil(a.r_max / RESOLUTION))
    i0, i1 = max(ci - k, 0), min(ci + k + 1, len(XS))
    j0, j1 = max(cj - k, 0), min(cj + k + 1, len(YS))
    gx, gy = np.meshgrid(XS[i0:i1], YS[j0:j1], indexing="ij")
    ok = ~static[i0:i1, j0:j1]
    for p in (point, *also):
        d = np.hypot(gx - p[0], gy - p[1])
        ok &= (d >= a.r_min) & (d <= a.r_max)
    return gx[ok], gy[ok]


def solve_base_ik(
    state: WorldState,
    arm: str,
    point: Point,
    rng: np.random.Generator,
    counter: _Counter | None = None,
    attempts: int | None = None,
    check: Callable[[Pose2], set[str]] | None = None,
    colliders: set | None = None,
    tracer: Tracer | None = None,
    also: Sequence[Point] = (),
) -> Iterator[Pose2]:
    """Yield base configurations that put ``point`` in the arm's workspace.

    Each draw picks a floor cell clear of static furniture inside the reach
    annulus (and the annuli of ``also``), jitters it, and aims the arm window
    at the centroid of the points. ``check``
    returns extra colliders for the draw. Colliders of draws that touch only
    movable or articulated bodies are added to ``colliders``.
    """
    a = state.scene.robot.arm(arm)
    xs, ys = _ik_cells(state, arm, point, also)
    pts = (point, *also)
    aim = (sum(p[0] for p in pts) / len(pts), sum(p[1] for p in pts) / len(pts))
    R = carry_radius(state)
    n = 0
    while True:
        if attempts is not None and n >= attempts:
            return
        if counter is not None and not counter.take("ik"):
            return
        n += 1
        if len(xs) == 0:
            if tracer:
                tracer.emit(sampler="ik", arm=arm, point=list(point), ok=False, why="no floor cell in reach")
            continue
        k = int(rng.integers(len(xs)))
        x = float(xs[k] + rng.uniform(-RESOLUTION / 2, RESOLUTION / 2))
        y = float(ys[k] + rng.uniform(-RESOLUTION / 2, RESOLUTION / 2))
        bearing = math.atan2(aim[1] - y, aim[0] - x)
        spread = 0.9 if not also else 0.3
        theta = geo.wrap_angle(bearing - a.center - float(rng.uniform(-spread, spread)) * a.half_width)
        q = (x, y, theta)
        if not in_bounds(state, q) or not a.in_reach(q, point):
            if tracer:
                tracer.emit(sampler="ik", arm=arm, point=list(point), ok=False, why="out of reach")
            continue
        hits = config_colliders(state, q, R)
        if check is not None:
            hits |= check(q)
        if tracer:
            tracer.emit(sampler="ik", arm=arm, point=list(point), q=list(q), ok=not hits, colliders=sorted(hits))
        if hits:
            if colliders is not None and STATIC_ID not in hits:
                colliders |= hits
            continue
        yield q


# --------------------------------------------------------------------------
# step semantics shared by planning and replay


def apply_step(state: WorldState, step: Step) -> WorldState:
    if isinstance(step, BaseStep):
        return state.with_base(step.path.end)
    a = step.action
    s = state.with_base(step.config)
    if a.name == "pick":
        return s.grasp(step.arm, a.args[0], step.grasp)
    if a.name == "place":
        return s.release(step.arm, a.args[1], step.pose)
    if a.name == "sprinkle":
        return s.sprinkle(a.args[0], a.args[1])
    if a.name in ("open", "close", "turn-on"):
        return s.set_joint(a.args[0], step.value)
    raise ValueError(f"no geometric semantics for {a.name}")


def sprinkle_zone(state: WorldState, region: str) -> tuple[Point, float]:
    """Pouring happens over the middle of the target."""
    x0, y0, x1, y1 = state.region_shape(region).aabb
    return ((x0 + x1) / 2, (y0 + y1) / 2), 0.3 * min(x1 - x0, y1 - y0) / 2


def sprinkle_ignores(state: WorldState, obj: str, region: str) -> set[str]:
    """Bodies the pouring arm may pass over: the shaker and uncovered contents."""
    out = {obj}
    for m in state.scene.movables:
        rest = state.resting(m.id)
        if rest is not None and rest.support == region and not m.lid:
            out.add(m.id)
    return out


def _sweep_values(v0: float, v1: float, step: float) -> list[float]:
    n = max(1, int(math.ceil(abs(v1 - v0) / step)))
    return [v0 + (v1 - v0) * k / n for k in range(n + 1)]


def joint_motion_colliders(state: WorldState, arm: str, q: Pose2, jid: str, v1: float) -> set[str]:
    """Colliders while the arm drags a joint from its current value to v1 with the base fixed."""
    j = state.scene.joint(jid)
    arm_m = state.scene.robot.arm(arm)
    v0 = state.joint_value(jid)
    # a revolute panel moves at most L * dtheta / 2 between checked angles
    if j.kind == PRISMATIC:
        values, pad = _sweep_values(v0, v1, 0.01), 0.005
    else:
        values = _sweep_values(v0, v1, SWEEP_STEP)
        reach = max(math.hypot(*v) for v in j.body.verts) if j.body is not None else 0.0
        pad = reach * SWEEP_STEP / 2
    R = carry_radius(state)
    base = geo.disc(q[0], q[1], state.scene.robot.base_radius + pad)
    carry = geo.disc(q[0], q[1], R + pad) if R > 0 else None
    # the end value is the likeliest to collide, so it goes first
    for v in [values[-1]] + values[:-1]:
        h = state.handle_point(jid, v)
        if not arm_m.in_reach(q, h):
            return {STATIC_ID}  # kinematic limit, not a body
        panel = state.joint_shape(jid, v)
        hits = arm_collisions(state, q, arm, h, ignore={jid}, joint_override={jid: panel})
        if panel is not None:
            fat = panel.inflated(pad)
            if geo.collides(base, fat):
                hits.add(jid)
            if carry is not None and j.tall and geo.collides(carry, fat):
                hits.add(jid)
            for oid, s in state.resting_bodies:
                sup = state.resting(oid).support
                if state.scene.region(sup).frame == jid:
                    continue
                if j.tall and geo.collides(fat, s):
                    hits.add(oid)
            for oid, s, tall in state.joint_bodies:
                if oid != jid and geo.collides(fat, s):
                    hits.add(oid)
        if hits:
            return hits
    return set()


def manip_colliders(state: WorldState, step: ManipStep) -> set[str]:
    """Everything wrong with executing ``step`` from ``state`` (empty when valid)."""
    a, arm, q = step.action, step.arm, step.config
    arm_m = state.scene.robot.arm(arm)
    hits = config_colliders(state, q)
    if not in_bounds(state, q):
        hits.add(STATIC_ID)
    if a.name in ("open", "close", "turn-on"):
        return hits | joint_motion_colliders(state, arm, q, a.args[0], step.value)
    if not arm_m.in_reach(q, step.point):
        hits.add(STATIC_ID)
    if a.name == "pick":
        obj = a.args[0]
        hits |= arm_collisions(state, q, arm, step.point, ignore={obj})
        after = state.with_base(q).grasp(arm, obj, step.grasp)
        hits |= config_colliders(after, q)
    elif a.name == "place":
        obj = a.args[0]
        placed = state.scene.movable(obj).footprint.moved(step.pose)
        hits |= object_collisions(state, obj, placed)
        if not geo.contains_shape(state.region_shape(a.args[1]), placed, PLACE_INSET - 1e-9):
            hits.add(STATIC_ID)
        hits |= arm_collisions(state, q, arm, step.point, ignore={obj})
    elif a.name == "sprinkle":
        center, radius = sprinkle_zone(state, a.args[1])
        if math.dist(center, step.point) > radius + 1e-9:
            hits.add(STATIC_ID)
        hits |= arm_collisions(state, q, arm, step.point, ignore=sprinkle_ignores(state, *a.args))
    return hits


# --------------------------------------------------------------------------
# refinement of one skeleton


@dataclass
class _Ctx:
    rng: np.random.Generator
    budgets: SamplerBudgets
    tracer: Tracer
    colliders: set = field(default_factory=set)
    trace: list = field(default_factory=list)
    hopeless: bool = False  # a step failed for reasons earlier steps cannot change


def _candidates(state: WorldState, action: GroundedAction, ctx: _Ctx, limit: int = 3) -> Iterator[tuple[ManipStep, BaseStep]]:
    """At most ``limit`` refined (manipulation, approach path) pairs for one step."""
    gen = _raw_candidates(state, action, ctx)
    for k, c in enumerate(gen):
        yield c
        if k + 1 >= limit:
            return


def _raw_candidates(state: WorldState, action: GroundedAction, ctx: _Ctx) -> Iterator[tuple[ManipStep, BaseStep]]:
    counter = _Counter(ctx.budgets)
    arm = action.arm
    rng = ctx.rng
    def with_motion(step: ManipStep):
        # the search is deterministic, so each configuration gets one query
        try:
            path = plan_motion(state, state.base, step.config)
        except MotionFailure as exc:
            ctx.tracer.emit(sampler="motion", q=list(step.config), ok=False, colliders=sorted(exc.colliders))
            ctx.colliders |= exc.colliders
            return None
        ctx.tracer.emit(sampler="motion", q=list(step.config), ok=True, waypoints=len(path.waypoints))
        return BaseStep(path)

    name = action.name
    if name == "pick":
        obj = action.args[0]
        obj_pose = state.movable_pose(obj)
        while counter.take("grasp"):
            g = sample_grasp(state, obj, rng)
            ctx.tracer.emit(sampler="grasp", obj=obj, grasp=list(g))
            point = geo.transform(obj_pose, g)

            def check(q, point=point, g=g):
                hits = arm_collisions(state, q, arm, point, ignore={obj})
                after = state.with_base(q).grasp(arm, obj, g)
                return hits | config_colliders(after, q)

            for q in _ik_take(state, arm, point, rng, counter, check, ctx, per_call=6):
                step = ManipStep(action, arm, q, point, grasp=g)
                path = with_motion(step)
                if path is not None:
                    yield step, path
            if counter.used["ik"] >= counter.limits["ik"]:
                break
    elif name == "place":
        obj, region = action.args[0], action.args[1]
        held = state.held_by(arm)
        mov = state.scene.movable(obj)
        fits = 0
        while counter.take("pose"):
            pose = sample_pose(state, region, obj, rng)
            if pose is None:
                ctx.tracer.emit(sampler="pose", obj=obj, region=region, ok=False, why="does not fit")
                continue
            fits += 1
            placed = mov.footprint.moved(pose)
            hits = object_collisions(state, obj, placed)
            ctx.tracer.emit(sampler="pose", obj=obj, region=region, pose=list(pose), ok=not hits, colliders=sorted(hits))
            if hits:
                if STATIC_ID not in hits:
                    ctx.colliders |= hits
                continue
            point = geo.transform(pose, held.grasp)

            def check(q, point=point):
                return arm_collisions(state, q, arm, point, ignore={obj})

            for q in _ik_take(state, arm, point, rng, counter, check, ctx, per_call=6):
                step = ManipStep(action, arm, q, point, grasp=held.grasp, pose=pose)
                path = with_motion(step)
                if path is not None:
                    yield step, path
            if counter.used["ik"] >= counter.limits["ik"]:
                break
        if fits == 0:
            ctx.hopeless = True
    elif name == "sprinkle":
        obj, region = action.args
        center, radius = sprinkle_zone(state, region)
        while counter.take("pose"):
            a, d = rng.uniform(0, 2 * math.pi), radius * math.sqrt(rng.uniform())
            point = (float(center[0] + d * math.cos(a)), float(center[1] + d * math.sin(a)))
            ctx.tracer.emit(sampler="pose", obj=obj, region=region, point=list(point), ok=True)

            def check(q, point=point):
                return arm_collisions(state, q, arm, point, ignore=sprinkle_ignores(state, obj, region))

            for q in _ik_take(state, arm, point, rng, counter, check, ctx, per_call=6):
                step = ManipStep(action, arm, q, point)
                path = with_motion(step)
                if path is not None:
                    yield step, path
            if counter.used["ik"] >= counter.limits["ik"]:
                break
    elif name in ("open", "close", "turn-on"):
        jid = action.args[0]
        j = state.scene.joint(jid)
        span = j.hi - j.lo
        while counter.take("pose"):
            if name == "open":
                target = j.lo + float(rng.uniform(max(j.open_threshold, 0.75), 1.0)) * span
            elif name == "close":
                target = j.lo
            else:
                target = j.hi
            point = state.handle_point(jid)

            def check(q, target=target):
                return joint_motion_colliders(state, arm, q, jid, target)

            v0 = state.joint_value(jid)
            arc = [state.handle_point(jid, v0 + (target - v0) * f) for f in (0.5, 1.0)]
            for q in _ik_take(state, arm, point, rng, counter, check, ctx, per_call=10, also=arc):
                step = ManipStep(action, arm, q, point, grasp=j.handle, value=target)
                path = with_motion(step)
                if path is not None:
                    yield step, path
            if counter.used["ik"] >= counter.limits["ik"]:
                break
    else:
        raise ValueError(f"cannot refine {name}")


def _ik_take(state, arm, point, rng, counter, check, ctx, per_call, also=()):
    """At most ``per_call`` IK draws for one target, charged to the step's IK budget."""
    return solve_base_ik(
        state, arm, point, rng, counter=counter, attempts=per_call, check=check, colliders=ctx.colliders,
        tracer=ctx.tracer, also=also,
    )


def refine_skeleton(
    state: WorldState, steps: Sequence[GroundedAction], ctx: _Ctx, max_backtrack: int = 2
) -> tuple[list[GroundedAction], list[Step], WorldState] | None:
    """Depth-first binding of a skeleton with bounded backtracking."""
    move = next(s for s in kitchen_domain().schemas if s.name == "move-base")
    n = len(steps)
    if n == 0:
        return [], [], state
    states = [state] + [None] * n
    chosen: list = [None] * n
    gens: list = [None] * n
    gens[0] = _candidates(state, steps[0], ctx)
    i = 0
    deepest = 0
    while True:
        try:
            step, path = next(gens[i])
        except StopIteration:
            deepest = max(deepest, i)
            if i == 0 or i - 1 < deepest - max_backtrack or ctx.hopeless:
                ctx.trace.append({"failed_step": i, "action": str(steps[i])})
                return None
            i -= 1
            continue
        chosen[i] = (path, step)
        after = apply_step(apply_step(states[i], path), step)
        states[i + 1] = after
        if i + 1 == n:
            break
        i += 1
        gens[i] = _candidates(after, steps[i], ctx)
    plan, traj = [], []
    for (path, step) in chosen:
        if len(path.path.waypoints) > 1:
            plan.append(GroundedAction(move, (), (), (("path", path.path.waypoints),)))
            traj.append(path)
        plan.append(step.action)
        traj.append(step)
    return plan, traj, states[n]


# --------------------------------------------------------------------------
# solve modes


def _rng(seed: int, rnd: int, idx: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, rnd, idx]))


def _goal_holds(state: WorldState, goal: Sequence[Literal]) -> bool:
    lits = relations(state)
    return all(holds(lits, g) for g in goal)


def solve_subgoal(
    state: WorldState,
    goal: Literal | Sequence[Literal],
    objects: Iterable[str] | None = None,
    budgets: SamplerBudgets = SamplerBudgets(),
    n_tamp: int = N_TAMP,
    memory: Iterable[str] = (),
    domain: Domain | None = None,
    tracer: Tracer | None = None,
) -> Solution:
    """Plan for a single subgoal with failure-driven object growth; raises RefinementFailure."""
    domain = domain or kitchen_domain()
    tracer = tracer or Tracer()
    goals = [goal] if isinstance(goal, Literal) else list(goal)
    objects = list(objects) if objects is not None else list(state.scene.planning_objects)
    if _goal_holds(state, goals):
        return Solution((), (), frozenset(), 0, 0)
    mem = set(memory)
    goal_args = {a for g in goals for a in g.args}
    diagnostics = []
    reason = NO_SKELETON
    tried = 0
    for rnd in range(n_tamp):
        reduced = reduce_objects(objects, state, goals, mem)
        table = planning_table(state, reduced)
        init = restrict_state(relations(state), table)
        skeletons = diverse_skeletons(domain, table, init, goals, k=budgets.skeleton_limit)
        round_colliders: set[str] = set()
        record = {"round": rnd + 1, "objects": sorted(reduced), "skeletons": len(skeletons), "attempts": []}
        for idx, sk in enumerate(skeletons):
            ctx = _Ctx(_rng(budgets.rng_seed, rnd, idx), budgets, tracer)
            tried += 1
            out = refine_skeleton(state, sk.steps, ctx)
            round_colliders |= ctx.colliders
            if out is not None:
                plan, traj, final = out
                if _goal_holds(final, goals):
                    seen = frozenset(c for c in mem | round_colliders if c != STATIC_ID and c not in goal_args)
                    return Solution(tuple(plan), tuple(traj), seen, rnd + 1, tried)
            record["attempts"].append({"skeleton": str(sk), "trace": ctx.trace, "colliders": sorted(ctx.colliders)})
        if skeletons:
            reason = BUDGET
        diagnostics.append(record)
        mem |= {c for c in round_colliders if c != STATIC_ID and c in set(objects)}
    targets = {a for g in goals for a in g.args}
    raise RefinementFailure(reason, frozenset(mem - targets), diagnostics, n_tamp)


def refine_action(
    state: WorldState,
    action: PartialAction | GroundedAction,
    objects: Iterable[str] | None = None,
    budgets: SamplerBudgets = SamplerBudgets(),
    n_tamp: int = N_TAMP,
    memory: Iterable[str] = (),
    domain: Domain | None = None,
    tracer: Tracer | None = None,
) -> Solution:
    """Refine one given action; only base motions may be added around it."""
    domain = domain or kitchen_domain()
    tracer = tracer or Tracer()
    table = state.scene.symbols
    lits = relations(state)
    if isinstance(action, GroundedAction):
        cands = [action]
    else:
        cands = candidate_bindings(domain, table, lits, action)
    cands = [c for c in cands if not unmet_preconditions(lits, c)]
    if not cands:
        raise RefinementFailure(SEMANTIC, frozenset(), [{"action": str(action), "why": "preconditions do not hold"}], 0)
    goals = sorted(effects_of(domain, table, lits, cands[0]))
    objects = list(objects) if objects is not None else list(state.scene.planning_objects)
    mem = set(memory)
    diagnostics = []
    tried = 0
    for rnd in range(n_tamp):
        reduced = reduce_objects(objects, state, goals, mem)
        round_colliders: set[str] = set()
        record = {"round": rnd + 1, "objects": sorted(reduced), "attempts": []}
        for idx, grounded in enumerate(cands[: budgets.skeleton_limit]):
            ctx = _Ctx(_rng(budgets.rng_seed, rnd, idx), budgets, tracer)
            tried += 1
            out = refine_skeleton(state, [grounded], ctx)
            round_colliders |= ctx.colliders
            if out is not None:
                plan, traj, final = out
                effects = effects_of(domain, table, lits, grounded)
                if _goal_holds(final, sorted(effects)):
                    seen = frozenset(c for c in mem | round_colliders if c != STATIC_ID)
                    return Solution(tuple(plan), tuple(traj), seen, rnd + 1, tried)
            record["attempts"].append({"skeleton": f"[{grounded.describe()}]", "trace": ctx.trace, "colliders": sorted(ctx.colliders)})
        diagnostics.append(record)
        mem |= {c for c in round_colliders if c != STATIC_ID and c in set(objects)}
    targets = set(cands[0].args)
    raise RefinementFailure(BUDGET, frozenset(mem - targets), diagnostics, n_tamp)

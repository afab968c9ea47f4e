"""Replay of refined plans in the world, with independent validity checks.

Base paths are sampled densely and tested with the exact robot and
attachment shapes rather than the planner's swept discs; joint motions are
sampled at half-degree steps without padding. Any problem raises
ExecutionDrift.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from . import geometry as geo
from .refine import BaseStep, ManipStep, Solution, Step, apply_step, sprinkle_ignores, sprinkle_zone
from .world import (
    PLACE_INSET,
    PRISMATIC,
    WorldState,
    arm_collisions,
    attachments,
    base_shape,
    in_bounds,
    object_collisions,
    robot_collisions,
    state_collisions,
)

PATH_STEP = 0.005
JOINT_STEP = math.radians(0.5)
POSE_TOL = 1e-6


class ExecutionDrift(Exception):
    def __init__(self, index: int, step: str, problems: list[str]):
        self.index, self.step, self.problems = index, step, list(problems)
        super().__init__(f"step {index} ({step}): {'; '.join(self.problems)}")


def _path_problems(state: WorldState, step: BaseStep) -> list[str]:
    w = step.path.waypoints
    out = []
    if math.dist(w[0][:2], state.base[:2]) > POSE_TOL:
        out.append("path does not start at the current base pose")
    for k in range(len(w)):
        samples = [w[k]]
        if k + 1 < len(w):
            a, b = w[k], w[k + 1]
            n = max(1, int(math.ceil(math.dist(a[:2], b[:2]) / PATH_STEP)))
            dth = geo.wrap_angle(b[2] - a[2])
            samples = [(a[0] + (b[0] - a[0]) * t / n, a[1] + (b[1] - a[1]) * t / n, a[2] + dth * t / n) for t in range(n + 1)]
        for q in samples:
            if not in_bounds(state, q):
                out.append(f"base leaves the floor at {q[0]:.3f}, {q[1]:.3f}")
                return out
            hits = robot_collisions(state, q)
            if hits:
                out.append(f"base or load touches {sorted(hits)} at {q[0]:.3f}, {q[1]:.3f}")
                return out
    return out


def _joint_problems(state: WorldState, step: ManipStep) -> list[str]:
    jid = step.action.args[0]
    j = state.scene.joint(jid)
    arm = state.scene.robot.arm(step.arm)
    q = step.config
    v0, v1 = state.joint_value(jid), step.value
    unit = 0.0025 if j.kind == PRISMATIC else JOINT_STEP
    n = max(1, int(math.ceil(abs(v1 - v0) / unit)))
    base = base_shape(state, q)
    loads = attachments(state, q)
    for k in range(n + 1):
        v = v0 + (v1 - v0) * k / n
        h = state.handle_point(jid, v)
        if not arm.in_reach(q, h):
            return [f"handle out of reach at {v:.3f}"]
        panel = state.joint_shape(jid, v)
        hits = arm_collisions(state, q, step.arm, h, ignore={jid}, joint_override={jid: panel})
        if panel is not None:
            if geo.collides(base, panel):
                hits.add("robot")
            for oid, s in loads:
                if j.tall and geo.collides(s, panel):
                    hits.add(oid)
            for oid, s in state.resting_bodies:
                if state.scene.region(state.resting(oid).support).frame == jid:
                    continue
                if j.tall and geo.collides(panel, s):
                    hits.add(oid)
            for oid, s, _ in state.joint_bodies:
                if oid != jid and geo.collides(panel, s):
                    hits.add(oid)
        if hits:
            return [f"{jid} at {v:.3f} touches {sorted(hits)}"]
    return []


def _manip_problems(state: WorldState, step: ManipStep) -> list[str]:
    a = step.action
    q = step.config
    if math.dist(q[:2], state.base[:2]) > POSE_TOL:
        return ["manipulation config differs from the base pose"]
    arm = state.scene.robot.arm(step.arm)
    if a.name in ("open", "close", "turn-on"):
        return _joint_problems(state, step)
    if not arm.in_reach(q, step.point):
        return ["target out of reach"]
    out = []
    if a.name == "pick":
        obj = a.args[0]
        if state.resting(obj) is None:
            return [f"{obj} is not resting"]
        want = geo.transform(state.movable_pose(obj), step.grasp)
        if math.dist(want, step.point) > POSE_TOL:
            out.append("gripper point is not at the grasp")
        hits = arm_collisions(state, q, step.arm, step.point, ignore={obj})
    elif a.name == "place":
        obj = a.args[0]
        shape = state.scene.movable(obj).footprint.moved(step.pose)
        if not geo.contains_shape(state.region_shape(a.args[1]), shape, PLACE_INSET - 1e-9):
            out.append(f"{obj} is not inside {a.args[1]}")
        hits = object_collisions(state, obj, shape) | arm_collisions(state, q, step.arm, step.point, ignore={obj})
    elif a.name == "sprinkle":
        center, radius = sprinkle_zone(state, a.args[1])
        if math.dist(center, step.point) > radius + 1e-9:
            out.append("not pouring over the target")
        hits = arm_collisions(state, q, step.arm, step.point, ignore=sprinkle_ignores(state, *a.args))
    else:
        return [f"unknown action {a.name}"]
    if hits:
        out.append(f"{a.name} touches {sorted(hits)}")
    return out


def step_problems(state: WorldState, step: Step) -> list[str]:
    if isinstance(step, BaseStep):
        return _path_problems(state, step)
    return _manip_problems(state, step)


@dataclass
class ExecutionResult:
    state: WorldState
    states: list


def execute(state: WorldState, solution: Solution | list[Step]) -> ExecutionResult:
    """Apply every step after checking it; raise ExecutionDrift on the first problem."""
    steps = solution.trajectories if isinstance(solution, Solution) else solution
    states = [state]
    for k, step in enumerate(steps):
        label = "move-base" if isinstance(step, BaseStep) else str(step.action)
        problems = step_problems(state, step)
        if problems:
            raise ExecutionDrift(k, label, problems)
        try:
            state = apply_step(state, step)
        except Exception as exc:  # world transition refused
            raise ExecutionDrift(k, label, [str(exc)]) from exc
        bad = state_collisions(state)
        if bad:
            raise ExecutionDrift(k, label, bad)
        states.append(state)
    return ExecutionResult(state, states)

import dataclasses

import pytest

from kitchentamp.execution import ExecutionDrift, execute
from kitchentamp.motion import BasePath
from kitchentamp.pddl import Literal
from kitchentamp.refine import BaseStep, ManipStep, solve_subgoal
from kitchentamp.world import relations


def test_empty_trajectory_leaves_state(easy):
    assert execute(easy, []).state == easy


def test_opening_the_fridge(obstacles):
    sol = solve_subgoal(obstacles, Literal("Opened", ("fridge_door",)))
    res = execute(obstacles, sol)
    assert Literal("Opened", ("fridge_door",)) in relations(res.state)
    assert len(res.states) == len(sol.trajectories) + 1


def _solution(obstacles):
    return solve_subgoal(obstacles, Literal("On", ("cabbage", "counter")))


def test_skipped_base_motion_drifts(obstacles):
    sol = _solution(obstacles)
    steps = [t for t in sol.trajectories if isinstance(t, ManipStep)]
    with pytest.raises(ExecutionDrift) as e:
        execute(obstacles, steps)
    assert e.value.index == 0


def test_teleporting_path_drifts(obstacles):
    sol = _solution(obstacles)
    steps = list(sol.trajectories)
    k = next(i for i, t in enumerate(steps) if isinstance(t, BaseStep))
    w = steps[k].path.waypoints
    # straight line through the counter
    steps[k] = BaseStep(BasePath((w[0], (2.2, 2.7, 0.0), w[-1])))
    with pytest.raises(ExecutionDrift):
        execute(obstacles, steps)


def test_moved_placement_drifts(obstacles):
    sol = _solution(obstacles)
    steps = list(sol.trajectories)
    k = max(i for i, t in enumerate(steps) if isinstance(t, ManipStep) and t.action.name == "place")
    p = steps[k].pose
    steps[k] = dataclasses.replace(steps[k], pose=(p[0] + 1.0, p[1], p[2]))
    with pytest.raises(ExecutionDrift, match="not inside"):
        execute(obstacles, steps)


def test_joint_target_past_limit_drifts(obstacles):
    sol = solve_subgoal(obstacles, Literal("Opened", ("drawer",)))
    steps = list(sol.trajectories)
    k = next(i for i, t in enumerate(steps) if isinstance(t, ManipStep))
    steps[k] = dataclasses.replace(steps[k], value=5.0)
    with pytest.raises(ExecutionDrift):
        execute(obstacles, steps)

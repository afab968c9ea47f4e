import dataclasses

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kitchentamp import geometry as geo
from kitchentamp.execution import execute
from kitchentamp.pddl import Literal, PartialAction, holds
from kitchentamp.refine import (
    BUDGET,
    PARKING,
    SEMANTIC,
    BaseStep,
    ManipStep,
    RefinementFailure,
    SamplerBudgets,
    Tracer,
    planning_table,
    reduce_objects,
    refine_action,
    sample_pose,
    solve_subgoal,
)
from kitchentamp.world import PLACE_INSET, relations

CABBAGE_OUT = Literal("On", ("cabbage", "counter"))


def test_budgets_validated():
    with pytest.raises(ValueError):
        SamplerBudgets(pose_attempts=0)
    with pytest.raises(ValueError):
        SamplerBudgets(skeleton_limit=0)


def test_reduce_objects_keeps_goal_held_and_memory(easy):
    objs = easy.scene.planning_objects
    held = easy.grasp("left", "salt_shaker", (0.0, 0.0))
    r = reduce_objects(objs, held, CABBAGE_OUT, memory=["drawer", "not_an_object"])
    assert r == {"cabbage", "counter", "salt_shaker", "drawer"}


def test_planning_table_adds_supports_parking_and_arms(obstacles):
    t = planning_table(obstacles, {"cabbage", "pot"})
    assert set(t.objects) == {"cabbage", "pot", "drawer_interior", "left", *PARKING}


def test_goal_already_true_gives_empty_solution(easy):
    sol = solve_subgoal(easy, Literal("Opened", ("fridge_door",)))
    assert sol.plan == () and sol.trajectories == () and sol.rounds == 0


def test_drawer_blocks_first_round(obstacles):
    with pytest.raises(RefinementFailure) as e:
        solve_subgoal(obstacles, CABBAGE_OUT, n_tamp=1)
    assert "drawer" in e.value.colliders
    assert e.value.reason == BUDGET
    sol = solve_subgoal(obstacles, CABBAGE_OUT, n_tamp=2)
    assert sol.rounds == 2
    assert [a.name for a in sol.task_actions] == ["open", "pick", "place"]
    assert "drawer" in sol.colliders_seen


def test_memory_skips_the_failed_round(obstacles):
    sol = solve_subgoal(obstacles, CABBAGE_OUT, n_tamp=1, memory=["drawer"])
    assert sol.rounds == 1


def test_refinement_is_deterministic(obstacles):
    a = solve_subgoal(obstacles, CABBAGE_OUT, budgets=SamplerBudgets(rng_seed=3))
    b = solve_subgoal(obstacles, CABBAGE_OUT, budgets=SamplerBudgets(rng_seed=3))
    assert a.plan == b.plan and a.trajectories == b.trajectories


def test_failure_colliders_exclude_goal_arguments(obstacles):
    with pytest.raises(RefinementFailure) as e:
        refine_action(obstacles, PartialAction("pick", ("chicken_leg",)))
    assert "fridge_door" in e.value.colliders
    assert "chicken_leg" not in e.value.colliders


def test_refine_action_semantic_failure(easy):
    with pytest.raises(RefinementFailure) as e:
        refine_action(easy, PartialAction("place", ("chicken_leg", "pot")))
    assert e.value.reason == SEMANTIC


def test_refine_action_adds_only_base_motion(easy):
    sol = refine_action(easy, PartialAction("pick", ("chicken_leg",)))
    assert [a.name for a in sol.task_actions] == ["pick"]
    assert holds(relations(execute(easy, sol).state), Literal("Holding", ("left", "chicken_leg")))


def test_tracer_records_sampler_calls(obstacles):
    tr = Tracer(enabled=True)
    solve_subgoal(obstacles, Literal("Opened", ("drawer",)), tracer=tr)
    assert tr.records and {"sampler"} <= set(tr.records[0])


@given(st.integers(0, 2**32 - 1), st.sampled_from(["counter", "pot", "sink", "fridge_shelf", "drawer_interior"]),
       st.sampled_from(["cabbage", "chicken_leg", "salt_shaker"]))
def test_sampled_poses_lie_inside_the_region(seed, region, body):
    from kitchentamp.world import VARIANTS, generate_scene

    _, s = generate_scene(VARIANTS[0], 0)
    pose = sample_pose(s, region, body, np.random.default_rng(seed))
    if pose is None:
        return
    placed = s.scene.movable(body).footprint.moved(pose)
    assert geo.contains_shape(s.region_shape(region), placed, PLACE_INSET - 1e-9)


def test_solution_steps_alternate_motion_and_manipulation(obstacles):
    sol = solve_subgoal(obstacles, CABBAGE_OUT)
    kinds = [type(t) for t in sol.trajectories]
    assert kinds.count(ManipStep) == len(sol.task_actions)
    for a, b in zip(kinds, kinds[1:]):
        assert not (a is BaseStep and b is BaseStep)


def test_changed_budget_seed_changes_samples(obstacles):
    a = solve_subgoal(obstacles, CABBAGE_OUT, budgets=SamplerBudgets(rng_seed=1))
    b = solve_subgoal(obstacles, CABBAGE_OUT, budgets=dataclasses.replace(SamplerBudgets(), rng_seed=2))
    assert a.trajectories != b.trajectories

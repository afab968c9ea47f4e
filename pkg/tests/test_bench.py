import csv
import io
import json
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kitchentamp.backends import ScriptedBackend, Transcript
from kitchentamp.bench import (
    PANELS,
    BenchConfig,
    FixtureMissing,
    assign_plans,
    render_trace,
    run_benchmark,
    transcript_name,
)
from kitchentamp.gateway import ACTIONS, MODES, SUBGOALS
from kitchentamp.orchestrator import EpisodeConfig, run_episode
from kitchentamp.world import VARIANTS, generate_scene

from conftest import TRANSCRIPTS


@given(st.integers(0, 10**6), st.sampled_from(VARIANTS), st.sampled_from(MODES), st.integers(1, 60), st.integers(1, 7))
def test_plan_assignment_is_balanced(seed, v, mode, trials, pool):
    a = assign_plans(seed, v, mode, trials, pool)
    assert a == assign_plans(seed, v, mode, trials, pool)
    counts = Counter(a)
    assert set(counts) <= set(range(1, pool + 1))
    assert max(counts.values()) - min(counts.get(k, 0) for k in range(1, pool + 1)) <= 1


def test_config_validation():
    for bad in ({"trials": 0}, {"plan_pool_size": 0}, {"backend": "x"}, {"modes": ("plans",)},
                {"n_reprompt": (3,)}, {"variants": ("kitchen",)}):
        with pytest.raises(ValueError):
            BenchConfig(**bad)


def _small(**kw):
    base = dict(variants=("obstacles-single",), modes=(SUBGOALS,), n_reprompt=(0,), trials=3,
                transcripts=str(TRANSCRIPTS), workers=1)
    base.update(kw)
    return BenchConfig(**base)


def test_missing_fixture(tmp_path):
    with pytest.raises(FixtureMissing):
        run_benchmark(_small(transcripts=str(tmp_path)))


def test_single_trial_matches_run_episode():
    rep = run_benchmark(_small(trials=1))
    cell = rep.cell("obstacles-single", SUBGOALS, 0)
    k = cell.trials[0].plan
    v = VARIANTS[2]
    tr = Transcript.load(TRANSCRIPTS / transcript_name(v, SUBGOALS, k))
    _, s = generate_scene(v, tr.meta["scene_seed"])
    ep = run_episode(EpisodeConfig(variant=v, refiner_seed=tr.meta["refiner_seed"]), s, ScriptedBackend(tr))
    assert cell.success_rate == float(ep.outcome == "Success")
    assert cell.completion == ep.completion_percentage
    assert cell.plan_length == len(ep.executed_plan)
    assert rep.episodes[f"obstacles-single/subgoals/N0/plan{k}"] == ep.to_dict()


def test_aggregates_recompute_from_trials():
    rep = run_benchmark(_small(trials=7, n_reprompt=(0, 2), modes=(SUBGOALS, ACTIONS)))
    for c in rep.cells:
        t = c.trials
        assert c.success_rate == pytest.approx(sum(r.outcome == "Success" for r in t) / len(t))
        assert c.completion == pytest.approx(sum(r.completion for r in t) / len(t))
        ok = [r.inserted for r in t if r.outcome == "Success"]
        assert c.inserted == (pytest.approx(sum(ok) / len(ok)) if ok else None)
    # cells that differ only in N replay the same plans
    assert [r.plan for r in rep.cell("obstacles-single", SUBGOALS, 0).trials] == \
        [r.plan for r in rep.cell("obstacles-single", SUBGOALS, 2).trials]


def test_outputs_written(tmp_path):
    rep = run_benchmark(_small(out=str(tmp_path), trace=True))
    rows = list(csv.DictReader(io.StringIO((tmp_path / "report.csv").read_text())))
    assert list(rows[0]) == ["variant", "method", "mode", "n_reprompt", "trials", *[p[0] for p in PANELS], "partial"]
    assert rows[0]["method"] == "subgoals-N0"
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["partial_results"] is False and len(doc["cells"]) == 1
    assert "transcripts" not in doc["config"]
    for col, _, _ in PANELS:
        assert (tmp_path / "charts" / f"{col}.svg").read_text().startswith("<?xml")
    for key, ep in rep.episodes.items():
        d = tmp_path / "traces" / key.replace("/", "-")
        frames = sorted(d.glob("frame-*.svg"))
        assert len(frames) == len(ep["executed_plan"]) + 1
        assert len((d / "events.jsonl").read_text().splitlines()) > 0


def test_render_trace_labels_each_action():
    v = VARIANTS[0]
    tr = Transcript.load(TRANSCRIPTS / transcript_name(v, SUBGOALS, 1))
    _, s = generate_scene(v, tr.meta["scene_seed"])
    ep = run_episode(EpisodeConfig(variant=v, refiner_seed=tr.meta["refiner_seed"]), s, ScriptedBackend(tr))
    frames = render_trace(ep)
    assert len(frames) == len(ep.executed_plan) + 1
    assert "initial state" in frames[0]
    assert ep.executed_plan[0].split("(")[0] in frames[1]

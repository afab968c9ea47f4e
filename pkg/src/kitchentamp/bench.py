"""Benchmark harness: the mode x reprompt-budget x variant grid over a plan pool."""
from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .backends import LiveBackend, LiveConfig, PlanBackend, RecordingBackend, ScriptedBackend, Transcript
from .gateway import ACTIONS, MODES, SUBGOALS
from .orchestrator import SUCCESS, TIMEOUT, EpisodeConfig, EpisodeReport, run_episode
from .render import render_svg
from .world import VARIANTS, Variant, generate_scene

# (csv column, cell attribute, chart title)
PANELS = (
    ("a_task_success", "success_rate", "Task success"),
    ("b_completion_percentage", "completion", "Task completion percentage"),
    ("c_sequence_length", "proposed_length", "Proposed sequence length"),
    ("d_subproblems_solved", "solved", "Subproblems solved"),
    ("e_plan_length", "plan_length", "Executed plan length"),
    ("f_actions_per_subproblem", "inserted", "Filled-in actions per subproblem"),
)


class FixtureMissing(FileNotFoundError):
    pass


@dataclass
class BenchConfig:
    variants: tuple[str, ...] = tuple(v.slug for v in VARIANTS)
    modes: tuple[str, ...] = (SUBGOALS, ACTIONS)
    n_reprompt: tuple[int, ...] = (0, 1, 2)
    trials: int = 30
    plan_pool_size: int = 5
    backend: str = "scripted"
    transcripts: str = "fixtures/transcripts"
    out: str | None = None
    seed: int = 0
    workers: int = 0  # 0 means one per available core
    trace: bool = False
    timeout_s: float = 900.0
    live: LiveConfig = field(default_factory=LiveConfig)

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.plan_pool_size < 1:
            raise ValueError("plan_pool_size must be at least 1")
        if self.backend not in ("scripted", "live"):
            raise ValueError("backend must be scripted or live")
        for m in self.modes:
            if m not in MODES:
                raise ValueError(f"unknown mode {m!r}")
        for n in self.n_reprompt:
            if n not in (0, 1, 2):
                raise ValueError("n_reprompt values must be 0, 1 or 2")
        self.variant_objs = [Variant.parse(v) for v in self.variants]

    def fingerprint(self) -> dict:
        """Settings that affect results; paths and worker count excluded."""
        return {
            "variants": [v.slug for v in self.variant_objs],
            "modes": list(self.modes),
            "n_reprompt": list(self.n_reprompt),
            "trials": self.trials,
            "plan_pool_size": self.plan_pool_size,
            "backend": self.backend,
            "seed": self.seed,
            "timeout_s": self.timeout_s,
        }


@dataclass
class TrialRecord:
    trial: int
    plan: int
    outcome: str
    failure_reason: str
    completion: float
    proposed_length: float
    solved: int
    plan_length: int
    inserted: float
    reprompts: int
    vlm_calls: int


@dataclass
class CellReport:
    variant: str
    mode: str
    n_reprompt: int
    trials: list[TrialRecord]
    success_rate: float = 0.0
    completion: float = 0.0
    proposed_length: float = 0.0
    solved: float = 0.0
    plan_length: float = 0.0
    inserted: float | None = None  # over successful trials only
    partial: bool = False

    @property
    def method(self) -> str:
        return f"{self.mode}-N{self.n_reprompt}"

    def aggregate(self) -> "CellReport":
        t = self.trials
        n = len(t)
        self.success_rate = sum(r.outcome == SUCCESS for r in t) / n
        self.completion = sum(r.completion for r in t) / n
        self.proposed_length = sum(r.proposed_length for r in t) / n
        self.solved = sum(r.solved for r in t) / n
        self.plan_length = sum(r.plan_length for r in t) / n
        ok = [r.inserted for r in t if r.outcome == SUCCESS]
        self.inserted = sum(ok) / len(ok) if ok else None
        self.partial = any(r.failure_reason == TIMEOUT for r in t)
        return self

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in ("variant", "mode", "n_reprompt", "success_rate", "completion",
                                           "proposed_length", "solved", "plan_length", "inserted", "partial")}
        d["completion_per_trial"] = [r.completion for r in self.trials]
        d["trials"] = [asdict(r) for r in self.trials]
        return d


@dataclass
class BenchReport:
    config: dict
    cells: list[CellReport]
    episodes: dict[str, dict]

    @property
    def partial(self) -> bool:
        return any(c.partial for c in self.cells)

    def cell(self, variant: str, mode: str, n: int) -> CellReport:
        v = Variant.parse(variant).slug
        for c in self.cells:
            if (c.variant, c.mode, c.n_reprompt) == (v, mode, n):
                return c
        raise KeyError((variant, mode, n))

    def to_json(self) -> str:
        doc = {
            "config": self.config,
            "partial_results": self.partial,
            "cells": [c.to_dict() for c in self.cells],
            "episodes": self.episodes,
        }
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["variant", "method", "mode", "n_reprompt", "trials"] + [p[0] for p in PANELS] + ["partial"])
        for c in self.cells:
            vals = []
            for _, attr, _ in PANELS:
                v = getattr(c, attr)
                vals.append("" if v is None else f"{v:.6f}")
            w.writerow([c.variant, c.method, c.mode, c.n_reprompt, len(c.trials)] + vals + [int(c.partial)])
        return buf.getvalue()


# --------------------------------------------------------------------------
# plan pool


def transcript_name(variant: Variant, mode: str, k: int) -> str:
    return f"{variant.slug}-{mode}-{k}.jsonl"


def plan_name(variant: Variant, mode: str, k: int) -> str:
    return f"{variant.slug.split('-')[0]}-{mode}-{k}.json"


def assign_plans(seed: int, variant: Variant, mode: str, trials: int, pool: int) -> list[int]:
    """Trial-to-plan assignment: shuffled blocks so every plan is used equally often.

    Independent of the reprompt budget, so cells that differ only in N see
    the same plans.
    """
    ss = np.random.SeedSequence([seed, VARIANTS.index(variant), MODES.index(mode)])
    rng = np.random.default_rng(ss)
    out: list[int] = []
    while len(out) < trials:
        out.extend(int(k) + 1 for k in rng.permutation(pool))
    return out[:trials]


def load_pool(directory: str | Path, variant: Variant, mode: str, pool: int) -> list[Transcript]:
    out = []
    for k in range(1, pool + 1):
        path = Path(directory) / transcript_name(variant, mode, k)
        if not path.is_file():
            raise FixtureMissing(f"missing transcript {path}")
        out.append(Transcript.load(path))
    return out


def record_transcript(backend, variant: Variant, mode: str, meta: dict, n_reprompt: int = 2,
                      timeout_s: float = 900.0) -> tuple[Transcript, EpisodeReport]:
    """Run one episode at the largest reprompt budget and keep every exchange.

    Smaller budgets replay a prefix of the same transcript.
    """
    _, state = generate_scene(variant, meta.get("scene_seed", 0))
    rec = RecordingBackend(backend, {**meta, "variant": variant.slug, "mode": mode})
    cfg = EpisodeConfig(
        mode=mode, n_reprompt=n_reprompt, variant=variant, scene_seed=meta.get("scene_seed", 0),
        refiner_seed=meta.get("refiner_seed", 0), timeout_s=timeout_s,
    )
    report = run_episode(cfg, state, rec)
    return rec.transcript(), report


def record_plan_fixtures(plans: str | Path, out: str | Path, variants=VARIANTS, modes=MODES, pool: int = 5) -> list[Path]:
    written = []
    for v in variants:
        for mode in modes:
            for k in range(1, pool + 1):
                src = Path(plans) / plan_name(v, mode, k)
                if not src.is_file():
                    raise FixtureMissing(f"missing plan {src}")
                plan = json.loads(src.read_text())
                meta = {"plan": k, "scene_seed": plan.get("scene_seed", 0), "refiner_seed": plan.get("refiner_seed", 0)}
                tr, _ = record_transcript(PlanBackend(plan), v, mode, meta)
                path = Path(out) / transcript_name(v, mode, k)
                tr.save(path)
                written.append(path)
    return written


def record_live_pool(config: BenchConfig, out: str | Path) -> None:
    """Ask the live model for a pool of plans per variant and mode, saved as transcripts."""
    backend = LiveBackend(config.live)
    for vi, v in enumerate(config.variant_objs):
        for mode in config.modes:
            for k in range(1, config.plan_pool_size + 1):
                seed = int(np.random.SeedSequence([config.seed, vi, MODES.index(mode), k]).generate_state(1)[0])
                meta = {"plan": k, "scene_seed": 0, "refiner_seed": seed}
                tr, _ = record_transcript(backend, v, mode, meta, max(config.n_reprompt), config.timeout_s)
                tr.save(Path(out) / transcript_name(v, mode, k))


# --------------------------------------------------------------------------
# episodes


def render_trace(report: EpisodeReport) -> list[str]:
    """One labeled SVG per committed state: the initial state, then one per executed action."""
    labels = ["initial state"] + list(report.executed_plan)
    return [render_svg(st, f"{k}: {label}") for k, (st, label) in enumerate(zip(report.frames, labels))]


def _trial_record(trial: int, plan: int, rep: EpisodeReport) -> TrialRecord:
    return TrialRecord(
        trial, plan, rep.outcome, rep.failure_reason, rep.completion_percentage, rep.proposed_length,
        rep.solved, len(rep.executed_plan), rep.inserted_per_subproblem, rep.reprompts_used, rep.vlm_calls,
    )


def _run_one(job: tuple) -> tuple:
    variant_slug, mode, n, transcript, timeout_s, trace = job
    v = Variant.parse(variant_slug)
    meta = transcript.meta
    _, state = generate_scene(v, meta.get("scene_seed", 0))
    cfg = EpisodeConfig(
        mode=mode, n_reprompt=n, variant=v, scene_seed=meta.get("scene_seed", 0),
        refiner_seed=meta.get("refiner_seed", 0), timeout_s=timeout_s,
    )
    rep = run_episode(cfg, state, ScriptedBackend(transcript))
    frames = render_trace(rep) if trace else []
    rep.frames = []  # states are not needed once rendered
    return rep, frames


def episode_key(variant: Variant, mode: str, n: int, k: int) -> str:
    return f"{variant.slug}/{mode}/N{n}/plan{k}"


def run_benchmark(config: BenchConfig) -> BenchReport:
    source = config.transcripts
    if config.backend == "live":
        if config.out is None:
            raise ValueError("a live benchmark needs an output directory for its transcripts")
        source = str(Path(config.out) / "transcripts")
        record_live_pool(config, source)

    pools = {}
    jobs = {}
    for v in config.variant_objs:
        for mode in config.modes:
            pool = load_pool(source, v, mode, config.plan_pool_size)
            pools[v, mode] = assign_plans(config.seed, v, mode, config.trials, config.plan_pool_size)
            for n in config.n_reprompt:
                # scripted episodes are deterministic, so each (plan, N) runs once
                for k in sorted(set(pools[v, mode])):
                    jobs[episode_key(v, mode, n, k)] = (v.slug, mode, n, pool[k - 1], config.timeout_s, config.trace)

    keys = list(jobs)
    workers = config.workers or os.cpu_count() or 1
    if workers > 1 and len(keys) > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = dict(zip(keys, ex.map(_run_one, [jobs[k] for k in keys])))
    else:
        results = {k: _run_one(jobs[k]) for k in keys}

    cells = []
    for v in config.variant_objs:
        for mode in config.modes:
            for n in config.n_reprompt:
                trials = []
                for t, k in enumerate(pools[v, mode]):
                    trials.append(_trial_record(t, k, results[episode_key(v, mode, n, k)][0]))
                cells.append(CellReport(v.slug, mode, n, trials).aggregate())
    episodes = {k: results[k][0].to_dict() for k in keys}
    report = BenchReport(config.fingerprint(), cells, episodes)
    if config.out is not None:
        traces = {k: (results[k][1], results[k][0].events) for k in keys} if config.trace else None
        write_outputs(report, config.out, traces)
    return report


# --------------------------------------------------------------------------
# outputs


def bar_chart_svg(report: BenchReport, attr: str, title: str) -> str:
    import matplotlib

    matplotlib.use("Agg")
    from matplotlib import pyplot as plt

    variants = list(dict.fromkeys(c.variant for c in report.cells))
    methods = list(dict.fromkeys(c.method for c in report.cells))
    width = 0.8 / max(1, len(methods))
    with matplotlib.rc_context({"svg.hashsalt": "kitchentamp", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(8, 3.5))
        for i, m in enumerate(methods):
            ys = []
            for v in variants:
                c = next((c for c in report.cells if c.variant == v and c.method == m), None)
                val = getattr(c, attr) if c is not None else None
                ys.append(0.0 if val is None else val)
            xs = [j + (i - (len(methods) - 1) / 2) * width for j in range(len(variants))]
            ax.bar(xs, ys, width, label=m)
        ax.set_xticks(range(len(variants)))
        ax.set_xticklabels(variants)
        ax.set_title(title)
        ax.legend(fontsize=7, ncol=2)
        fig.tight_layout()
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buf.getvalue()


def write_outputs(report: BenchReport, out: str | Path, traces: dict[str, tuple[list[str], list[dict]]] | None = None) -> None:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json())
    (out / "report.csv").write_text(report.to_csv())
    charts = out / "charts"
    charts.mkdir(exist_ok=True)
    for col, attr, title in PANELS:
        (charts / f"{col}.svg").write_text(bar_chart_svg(report, attr, title))
    if traces:
        for key, (frames, events) in traces.items():
            d = out / "traces" / key.replace("/", "-")
            d.mkdir(parents=True, exist_ok=True)
            for i, svg in enumerate(frames):
                (d / f"frame-{i:03d}.svg").write_text(svg)
            (d / "report.json").write_text(json.dumps(report.episodes[key], indent=1, sort_keys=True) + "\n")
            (d / "events.jsonl").write_text("".join(json.dumps(e, sort_keys=True) + "\n" for e in events))

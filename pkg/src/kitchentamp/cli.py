"""Command line: plan, bench, render, validate-fixtures."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .backends import LiveBackend, LiveConfig, ScriptedBackend, Transcript
from .bench import (
    BenchConfig,
    FixtureMissing,
    load_pool,
    render_trace,
    run_benchmark,
    transcript_name,
)
from .gateway import MODES, SUBGOALS
from .orchestrator import EpisodeConfig, run_episode, validate_trace
from .render import render_svg
from .world import VARIANTS, Variant, generate_scene


def load_config(path: str | None) -> dict:
    """Flat keys plus an optional [live] table, from a TOML file."""
    if not path:
        return {}
    try:
        import tomllib
    except ModuleNotFoundError:  # before 3.11
        import tomli as tomllib

    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _pick(args, cfg: dict, name: str, default):
    v = getattr(args, name, None)
    if v is not None:
        return v
    return cfg.get(name.replace("_", "-"), cfg.get(name, default))


def _as_list(v) -> list:
    return list(v) if isinstance(v, (list, tuple)) else [v]


def _episode(args, cfg) -> tuple:
    variant = Variant.parse(_pick(args, cfg, "variant", "easy-single"))
    mode = _pick(args, cfg, "mode", SUBGOALS)
    n = int(_pick(args, cfg, "n_reprompt", 0))
    backend_kind = _pick(args, cfg, "backend", "scripted")
    if backend_kind == "live":
        backend = LiveBackend(LiveConfig.from_mapping(cfg.get("live", {})))
        seed = int(_pick(args, cfg, "seed", 0))
        scene_seed = 0
    else:
        k = int(_pick(args, cfg, "plan", 1))
        tdir = Path(_pick(args, cfg, "transcripts", "fixtures/transcripts"))
        path = tdir if tdir.is_file() else tdir / transcript_name(variant, mode, k)
        if not path.is_file():
            raise FixtureMissing(f"missing transcript {path}")
        tr = Transcript.load(path)
        backend = ScriptedBackend(tr)
        seed = int(tr.meta.get("refiner_seed", 0))
        scene_seed = int(tr.meta.get("scene_seed", 0))
    _, state = generate_scene(variant, scene_seed)
    ec = EpisodeConfig(mode=mode, n_reprompt=n, variant=variant, scene_seed=scene_seed, refiner_seed=seed)
    return ec, run_episode(ec, state, backend)


def _write_frames(report, out: Path) -> int:
    out.mkdir(parents=True, exist_ok=True)
    frames = render_trace(report)
    for i, svg in enumerate(frames):
        (out / f"frame-{i:03d}.svg").write_text(svg)
    return len(frames)


def cmd_plan(args, cfg) -> int:
    ec, report = _episode(args, cfg)
    doc = report.to_dict()
    print(f"{ec.variant.slug} {ec.mode} N={ec.n_reprompt}: {report.outcome}"
          f" completion={report.completion_percentage:.3f} {report.failure_reason}")
    for a in report.executed_plan:
        print("  " + a)
    out = _pick(args, cfg, "out", None)
    if out:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
        (out / "events.jsonl").write_text("".join(json.dumps(e, sort_keys=True) + "\n" for e in report.events))
        if _pick(args, cfg, "trace", False):
            _write_frames(report, out / "frames")
    else:
        print(json.dumps(doc, indent=1, sort_keys=True))
    return 0


def cmd_bench(args, cfg) -> int:
    variants = _pick(args, cfg, "variant", None)
    modes = _pick(args, cfg, "mode", None)
    ns = _pick(args, cfg, "n_reprompt", None)
    config = BenchConfig(
        variants=tuple(_as_list(variants)) if variants else BenchConfig.variants,
        modes=tuple(_as_list(modes)) if modes else BenchConfig.modes,
        n_reprompt=tuple(int(n) for n in _as_list(ns)) if ns is not None else BenchConfig.n_reprompt,
        trials=int(_pick(args, cfg, "trials", 30)),
        plan_pool_size=int(_pick(args, cfg, "plan_pool_size", 5)),
        backend=_pick(args, cfg, "backend", "scripted"),
        transcripts=str(_pick(args, cfg, "transcripts", "fixtures/transcripts")),
        out=_pick(args, cfg, "out", None),
        seed=int(_pick(args, cfg, "seed", 0)),
        workers=int(_pick(args, cfg, "workers", 0)),
        trace=bool(_pick(args, cfg, "trace", False)),
        live=LiveConfig.from_mapping(cfg.get("live", {})),
    )
    report = run_benchmark(config)
    print(report.to_csv(), end="")
    if report.partial:
        print("warning: some trials timed out; results are partial", file=sys.stderr)
    return 0


def cmd_render(args, cfg) -> int:
    out = Path(_pick(args, cfg, "out", "renders"))
    if _pick(args, cfg, "mode", None) is None:
        out.mkdir(parents=True, exist_ok=True)
        for v in [Variant.parse(x) for x in _as_list(_pick(args, cfg, "variant", [v.slug for v in VARIANTS]))]:
            _, state = generate_scene(v, 0)
            (out / f"{v.slug}.svg").write_text(render_svg(state, v.name))
            print(out / f"{v.slug}.svg")
        return 0
    ec, report = _episode(args, cfg)
    n = _write_frames(report, out)
    print(f"{n} frames in {out}")
    return 0


def validate_transcripts(directory: str | Path, pool: int = 5) -> list[str]:
    """Replay every shipped transcript at each reprompt budget; return problems."""
    problems = []
    for v in VARIANTS:
        for mode in MODES:
            try:
                trs = load_pool(directory, v, mode, pool)
            except FixtureMissing as exc:
                problems.append(str(exc))
                continue
            for k, tr in enumerate(trs, 1):
                name = transcript_name(v, mode, k)
                for n in (0, 1, 2):
                    _, state = generate_scene(v, tr.meta.get("scene_seed", 0))
                    ec = EpisodeConfig(mode=mode, n_reprompt=n, variant=v, refiner_seed=tr.meta.get("refiner_seed", 0))
                    backend = ScriptedBackend(tr)
                    rep = run_episode(ec, state, backend)
                    if rep.failure_reason == "BackendError":
                        problems.append(f"{name} N={n}: {rep.failure_message}")
                    for p in validate_trace(rep.events, n):
                        problems.append(f"{name} N={n}: {p}")
                    if n == 2 and backend.cursor != len(tr.exchanges):
                        problems.append(f"{name}: {len(tr.exchanges) - backend.cursor} exchanges never used")
    return problems


def cmd_validate(args, cfg) -> int:
    directory = _pick(args, cfg, "transcripts", "fixtures/transcripts")
    problems = validate_transcripts(directory)
    for p in problems:
        print(p)
    print("ok" if not problems else f"{len(problems)} problems")
    return 1 if problems else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kitchentamp", description="Language-model-guided task and motion planning in a 2D kitchen.")
    sub = ap.add_subparsers(dest="verb", required=True)

    def common(p, multi=False):
        nargs = "+" if multi else None
        p.add_argument("--config", help="TOML file; flags override its keys")
        p.add_argument("--variant", nargs=nargs, help="easy-single, easy-dual, obstacles-single, obstacles-dual")
        p.add_argument("--mode", nargs=nargs, choices=MODES)
        p.add_argument("--n-reprompt", dest="n_reprompt", type=int, nargs=nargs, choices=(0, 1, 2))
        p.add_argument("--backend", choices=("scripted", "live"))
        p.add_argument("--transcripts", help="transcript directory (or one file for plan/render)")
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--trace", action="store_true", default=None, help="write SVG frames and event logs")

    p = sub.add_parser("plan", help="run one episode")
    common(p)
    p.add_argument("--plan", type=int, help="which transcript of the pool to replay")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("bench", help="run the benchmark grid")
    common(p, multi=True)
    p.add_argument("--trials", type=int)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("render", help="render scenes, or the frames of one episode when --mode is given")
    common(p)
    p.add_argument("--plan", type=int)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("validate-fixtures", help="replay transcripts and check every digest")
    common(p)
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = load_config(args.config)
    try:
        return args.func(args, cfg)
    except FixtureMissing as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

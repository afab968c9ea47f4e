"""Run the full scripted grid and print the headline comparisons.

Writes report.json, report.csv and charts/ under --out.
"""
import argparse
import time
from pathlib import Path

import numpy as np

from kitchentamp.bench import BenchConfig, run_benchmark
from kitchentamp.gateway import ACTIONS, SUBGOALS

ROOT = Path(__file__).resolve().parents[1]

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="grid")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--trials", type=int, default=30)
    ap.add_argument("--workers", type=int, default=0)
    ap.add_argument("--trace", action="store_true")
    args = ap.parse_args()

    t0 = time.monotonic()
    cfg = BenchConfig(transcripts=str(ROOT / "fixtures" / "transcripts"), out=args.out, seed=args.seed,
                      trials=args.trials, workers=args.workers, trace=args.trace)
    rep = run_benchmark(cfg)
    print(rep.to_csv(), end="")
    print(f"\n{time.monotonic() - t0:.0f}s, {len(rep.episodes)} distinct episodes")
    for v in cfg.variants:
        comp = {m: np.mean([rep.cell(v, m, n).completion for n in cfg.n_reprompt]) for m in (SUBGOALS, ACTIONS)}
        succ = " ".join(f"{m[0]}N{n}={rep.cell(v, m, n).success_rate:.2f}" for m in (SUBGOALS, ACTIONS) for n in cfg.n_reprompt)
        print(f"{v:17s} {succ}  completion gap {comp[SUBGOALS] - comp[ACTIONS]:.3f}")

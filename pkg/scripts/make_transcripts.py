"""Record the shipped transcripts from the authored plan files.

Each plan is played at the largest reprompt budget; smaller budgets replay a
prefix of the same transcript.
"""
import argparse
from pathlib import Path

from kitchentamp.bench import record_plan_fixtures

ROOT = Path(__file__).resolve().parents[1]

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--plans", default=ROOT / "fixtures" / "plans")
    ap.add_argument("--out", default=ROOT / "fixtures" / "transcripts")
    args = ap.parse_args()
    for path in record_plan_fixtures(args.plans, args.out):
        print(path.relative_to(ROOT) if path.is_relative_to(ROOT) else path)

from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from kitchentamp.world import VARIANTS, generate_scene

ROOT = Path(__file__).resolve().parents[1]
TRANSCRIPTS = ROOT / "fixtures" / "transcripts"
PLANS = ROOT / "fixtures" / "plans"

settings.register_profile(
    "repo", deadline=None, derandomize=True, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def scenes():
    return {v.slug: generate_scene(v, 0) for v in VARIANTS}


@pytest.fixture
def easy(scenes):
    return scenes["easy-single"][1]


@pytest.fixture
def obstacles(scenes):
    return scenes["obstacles-single"][1]


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance")
        for line in RESULTS:
            terminalreporter.write_line(line)

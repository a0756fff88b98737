import sys
from functools import lru_cache
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from jointsearch.simbench import BUILTIN_PROFILES, generate_ground_truth  # noqa: E402
from jointsearch.space import SearchSpaceConfig  # noqa: E402

SHIPPED_SEEDS = tuple(range(10))
SHIPPED_PROFILE = "edge-cpu"
NON_UNIFORM_PROFILES = ("edge-cpu", "mips-camera", "mobile-gpu")

ACCEPTANCE_LINES: list[str] = []


@lru_cache(maxsize=None)
def truth_for(seed: int, profile: str = SHIPPED_PROFILE):
    return generate_ground_truth(seed, SearchSpaceConfig(), BUILTIN_PROFILES[profile])


@pytest.fixture(scope="session")
def default_space():
    return SearchSpaceConfig()


@pytest.fixture(scope="session")
def truth():
    return truth_for(0)


@pytest.fixture(scope="session")
def uniform_truth():
    return truth_for(0, "uniform")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

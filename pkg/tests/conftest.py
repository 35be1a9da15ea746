import math
import os

import pytest
from hypothesis import settings

from mosim.core import RandomStream

# fixed example sequence by default; HYPOTHESIS_PROFILE=explore for fresh draws
settings.register_profile("repro", derandomize=True, deadline=None)
settings.register_profile("explore", max_examples=1000, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repro"))

# Monte Carlo agreement band, in standard errors
BAND = 4.0


def within(est, target, n, band=BAND):
    """True if a frequency ``est`` from ``n`` draws is within ``band`` binomial
    standard errors of ``target``."""
    se = math.sqrt(max(target * (1.0 - target), 1e-300) / n)
    return abs(est - target) <= band * se


@pytest.fixture
def rng():
    return RandomStream(20240521).generator()


@pytest.fixture
def rng_factory():
    def make(index):
        return RandomStream(20240521, index).generator()

    return make


# acceptance verdict lines, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

from pathlib import Path

import numpy as np
import pytest

import _support

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def rng(request):
    # a stable per-test seed so failures reproduce
    seed = sum(map(ord, request.node.nodeid)) % (2 ** 32)
    return np.random.default_rng(seed)


def pytest_terminal_summary(terminalreporter):
    if _support.ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_support.ACCEPTANCE):
            terminalreporter.write_line(_support.format_line(number))
    if _support.VARIATIONAL_LOG:
        below = sum(_support.violates_bound(e, x) for e, x in _support.VARIATIONAL_LOG)
        terminalreporter.write_line(
            f"variational bound: {len(_support.VARIATIONAL_LOG)} QAE runs checked, "
            f"{below} below the exact ground energy beyond {_support.BOUND_SLACK:g} relative slack")

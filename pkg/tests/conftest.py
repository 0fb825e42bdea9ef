from pathlib import Path

import pytest

from flowembed.generators import random_marker
from flowembed.kernel import make_chi1
from flowembed.phi import make_phi
from flowembed.theta import build_params

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def params():
    return build_params()


@pytest.fixture(scope="session")
def kernel():
    return make_chi1(0.8)


@pytest.fixture(scope="session")
def phi(params):
    return make_phi(random_marker(700, (-2000, 2000)), params)


@pytest.fixture(scope="session")
def golden():
    return GOLDEN


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.LINES:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.LINES:
            terminalreporter.write_line(line)

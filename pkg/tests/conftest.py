import numpy as np
import pytest
from hypothesis import settings

from noetherian.catalog import CATALOG
from noetherian.config import RunConfig

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def config():
    return RunConfig()


@pytest.fixture
def exp_chain():
    chain, exports = CATALOG["exp"].build()
    return chain


@pytest.fixture
def sincos_chain():
    chain, exports = CATALOG["sin"].build()
    return chain


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)

import numpy as np
import pytest

from photomap.flightsim import make_texture
from photomap.preprocess import Frame

# filled by test_acceptance.py, printed once at the end of the run
ACCEPTANCE = {}


@pytest.fixture(scope="session")
def texture():
    return make_texture(256, seed=11)


@pytest.fixture(scope="session")
def frame(texture):
    return Frame(texture)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {key}: {detail}")

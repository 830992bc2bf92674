import math

import numpy as np
import pytest
from hypothesis import settings

from solcomp.field import make_nonlinearity_cubic_like
from solcomp.macrostate import MacroParams

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

SIGMA2 = 8.5
SIGMA = math.sqrt(SIGMA2)

# acceptance verdicts collected during the run, printed once in the summary
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def nl():
    return make_nonlinearity_cubic_like(0.25)


@pytest.fixture(scope="session")
def mp():
    return MacroParams(alpha=0.7, beta=0.1, m=-0.1, sigma=SIGMA)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, msg = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {msg}")

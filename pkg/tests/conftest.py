import math

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from kerrswitch.model import ModelParams

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


def record(criterion, passed, detail):
    line = f"CRITERION {criterion}: {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


@pytest.fixture
def acceptance():
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@st.composite
def bistable_params(draw, min_delta_frac=-0.9, max_delta_frac=0.9, max_theta=0.45 * math.pi):
    G = draw(st.floats(2.0, 10.0))
    kappa = draw(st.floats(0.3, 1.5))
    theta = draw(st.floats(0.0, max_theta))
    frac = draw(st.floats(min_delta_frac, max_delta_frac))
    return ModelParams.from_polar(G, frac * G, kappa, theta)

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from polarijsa.config import reference_config
from polarijsa.jsa import AnalyticJsa

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# (criterion, passed, message) tuples filled in by test_acceptance.py
ACCEPTANCE_LINES: list[tuple[int, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, message in sorted(ACCEPTANCE_LINES):
        flag = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2}: {flag}  {message}")


def rational_input(center=1.81, offset=0.005, w_i=0.03, w_s=0.025):
    """Input whose poles lie where closing the residue contours is legitimate."""

    def f(zs, zi):
        return 1.0 / ((zi - (center - offset) - 1j * w_i) * (zs - (center + offset) + 1j * w_s))

    return AnalyticJsa(f, "rational")


@pytest.fixture
def vacuum_config():
    return reference_config(0.0065, 0.0)


@pytest.fixture
def occupied_config():
    return reference_config(0.0065, 1.0)


@pytest.fixture
def probe():
    return rational_input()


@pytest.fixture
def probe_grid():
    ax = np.linspace(1.76, 1.86, 9)
    return np.meshgrid(ax, ax, indexing="ij")

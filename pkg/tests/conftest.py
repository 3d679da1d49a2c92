import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("framekit", deadline=None, max_examples=30,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("framekit")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


MB_VECTORS = np.array([[1.0, -0.5, -0.5],
                       [0.0, np.sqrt(3) / 2, -np.sqrt(3) / 2]])
# Gram of the Mercedes-Benz frame: 1 on the diagonal, -1/2 elsewhere.
MB_GRAM = np.array([[1.0, -0.5, -0.5], [-0.5, 1.0, -0.5], [-0.5, -0.5, 1.0]])

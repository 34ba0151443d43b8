import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


_REPORT = []


@pytest.fixture
def report():
    """Collect one line per measured quantity; shown at the end of the run."""
    return _REPORT.append


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance measurements")
        for line in _REPORT:
            terminalreporter.write_line(line)

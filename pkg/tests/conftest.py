import numpy as np
import pytest

from ocrskit import RandomSource


@pytest.fixture
def rng():
    return RandomSource(20260826)


def max_abs(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def pytest_terminal_summary(terminalreporter):
    """Replay acceptance-criterion PASS/FAIL lines after the test summary."""
    import sys

    mod = sys.modules.get("tests.test_acceptance") or sys.modules.get("test_acceptance")
    lines = getattr(mod, "REPORT_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

import numpy as np
import pytest

import acceptance_report
from demo_data import DEMO_M, DEMO_W


def pytest_terminal_summary(terminalreporter):
    if acceptance_report.LINES:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_report.LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def demo():
    """Copies of the demo data matrix and dictionary."""
    return DEMO_M.copy(), DEMO_W.copy()


@pytest.fixture
def demo_gram():
    """Shared Gram data for the demo dictionary."""
    from shamans.densela import gram

    P = gram(np.asfortranarray(DEMO_W))
    L = DEMO_W.T @ DEMO_M
    return P, L

import itertools

import numpy as np
import pytest

SWEEP = list(itertools.product((0.5, 1.0, 5.0, 10.0), (1, 2, 3, 6), (1, 2, 6)))
LOG_GRID = np.geomspace(1e-6, 50.0, 400)


def sweep_ids(points):
    return [f"k{k}-mu{mu}-m{m}" for k, mu, m in points]


@pytest.fixture(scope="session")
def log_grid():
    return LOG_GRID.copy()


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.REPORT:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.REPORT):
            terminalreporter.write_line(line)

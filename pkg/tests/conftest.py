import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from planarkernels.geometry import builtin_domain, sample_boundary  # noqa: E402
from planarkernels.hardy import Weight, build_hardy_basis  # noqa: E402
from planarkernels.verify import Workspace  # noqa: E402

K_DEFAULT = 80


@pytest.fixture(scope="session")
def disc_ws():
    return Workspace(builtin_domain("disc"), 256, K_DEFAULT)


@pytest.fixture(scope="session")
def annulus_ws():
    return Workspace(builtin_domain("annulus", 0.3), 256, K_DEFAULT)


@pytest.fixture(scope="session")
def tri_ws():
    return Workspace(builtin_domain("three_connected", 0.2, 0.5), 256, K_DEFAULT)


@pytest.fixture(scope="session")
def annulus_cos_weight(annulus_ws):
    return Weight.from_parameter(annulus_ws.grid, lambda t: 2 + np.cos(t), "2+cos(t)")


@pytest.fixture(scope="session")
def small_disc_basis():
    d = builtin_domain("disc")
    g = sample_boundary(d, 64)
    return build_hardy_basis(d, g, Weight.unit(g), 12)


ACCEPTANCE_LINES = {}


@pytest.fixture
def criterion():
    """Record one acceptance line: criterion(number, passed, text)."""

    def record(number, passed, text):
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {text}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])

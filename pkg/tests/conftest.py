from fractions import Fraction

import pytest

from rcpredict.dfg import Dfg
from rcpredict.library import TaskLibrary, TaskTypeSpec

ACCEPTANCE_LINES: list[str] = []


def spec(type_id, mode="hardware", hw=10, sw=0, area=5, rt=5, rp=100, hwp=10, swp=0):
    if mode == "software":
        hw, area, rt = 0, 0, 0
    if mode != "hardware" and sw == 0:
        sw = 2 * max(hw, 1)
    if mode != "hardware" and swp == 0:
        swp = 20
    return TaskTypeSpec(type_id, mode, hw, sw, area, rt, Fraction(rp), Fraction(hwp), Fraction(swp))


def make_lib(*specs):
    return TaskLibrary(specs)


def chain(n, type_id=1, dfg_id="chain"):
    return Dfg(dfg_id, tuple((i, type_id) for i in range(n)), tuple((i, i + 1) for i in range(n - 1)))


@pytest.fixture
def small_lib():
    return make_lib(spec(1), spec(2, "hybrid", hw=20, area=10), spec(3, "software", sw=30),
                    spec(4, "hybrid", hw=5, area=30, rt=12))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def separable(seed=7, n=200):
    """Two classes split on the first feature with a gap of two standard deviations."""
    import numpy as np
    rng = np.random.default_rng(seed)
    half = n // 2
    a = rng.normal(0.0, 1.0, (4 * half, 2))
    a = a[a[:, 0] < 1.5][:half]
    b = rng.normal(0.0, 1.0, (4 * half, 2)) + [5.0, 0.0]
    b = b[b[:, 0] > 3.5][:half]
    return np.vstack([a, b]), np.array([0] * half + [1] * half)

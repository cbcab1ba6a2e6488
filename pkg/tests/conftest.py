import numpy as np
import pytest
from hypothesis import strategies as st

from wearteleop.quaternion import Quaternion


@st.composite
def unit_quaternions(draw):
    v = draw(st.lists(st.floats(-1.0, 1.0, allow_nan=False), min_size=4, max_size=4))
    a = np.array(v)
    n = np.linalg.norm(a)
    if n < 1e-3:
        a, n = np.array([1.0, 0.0, 0.0, 0.0]), 1.0
    return Quaternion.from_array(a / n)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance criteria report one line each at the end of the session
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def criterion():
    def record(n: int, ok: bool, detail: str):
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[n] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])

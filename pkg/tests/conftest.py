import random

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from posetsheaves import poset as ps
from posetsheaves.families import random_poset
from posetsheaves.simplicial import affine_space

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def posets(draw, min_size=1, max_size=6):
    n = draw(st.integers(min_size, max_size))
    seed = draw(st.integers(0, 10**6))
    return random_poset(n, random.Random(seed))


@st.composite
def int_matrices(draw, max_rows=5, max_cols=5, lo=-6, hi=6):
    m = draw(st.integers(0, max_rows))
    n = draw(st.integers(0, max_cols))
    rows = draw(st.lists(st.lists(st.integers(lo, hi), min_size=n, max_size=n), min_size=m, max_size=m))
    return rows, m, n


@pytest.fixture
def V():
    return ps.v_poset()


@pytest.fixture
def A2():
    return affine_space(2)


@pytest.fixture
def A3():
    return affine_space(3)


@pytest.fixture
def E11():
    return ps.e11_poset()


# acceptance results: number -> (passed, seconds, budget, detail)
ACCEPTANCE: dict[int, tuple[bool, float, float, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, secs, budget, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  "
                                    f"({secs:.2f}s of {budget:.0f}s)  {detail}")

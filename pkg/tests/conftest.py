from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from knapexp.model import Instance, Interval, Item

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance():
    def record(number: int, ok: bool, detail: str):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)
        assert ok, line
    return record


rationals = st.builds(lambda a, b: Fraction(a, b), st.integers(0, 60), st.sampled_from([1, 2, 3, 4, 6]))


@st.composite
def instances(draw, max_n=7, max_w=12):
    """Small valid instances with a mix of trivial and open intervals."""
    n = draw(st.integers(0, max_n))
    weights = [draw(st.integers(1, max_w)) for _ in range(n)]
    capacity = draw(st.integers(max(weights, default=1), max(max(weights, default=1), sum(weights))))
    items = []
    for i, w in enumerate(weights, start=1):
        up = draw(rationals)
        if up == 0 or draw(st.booleans()) and draw(st.booleans()):
            items.append(Item(i, w, up, Interval.point(up)))
            continue
        lo = up * Fraction(draw(st.integers(0, 7)), 8)
        p = lo + (up - lo) * Fraction(draw(st.integers(1, 9)), 10)
        items.append(Item(i, w, p, Interval(lo, up)))
    return Instance(tuple(items), capacity)

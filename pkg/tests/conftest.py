import numpy as np
import pytest
from hypothesis import strategies as st

from rchain.trajectory import PathPoint, TrainingSample


def sample_from_xy(past, future, t0=0):
    """Build a TrainingSample from plain (x, y) lists; current point is past[-1]."""
    pts = [PathPoint(t0 + i, float(x), float(y)) for i, (x, y) in enumerate([*past, *future])]
    return TrainingSample(tuple(pts[: len(past)]), tuple(pts[len(past):]))


def random_sample(rng, n, m, scale=50.0, dyadic=False):
    xy = rng.uniform(-scale, scale, size=(n + 1 + m, 2))
    if dyadic:
        # multiples of 2**-10 in a small range keep every sum/difference exact
        xy = np.round(xy * 1024) / 1024
    return sample_from_xy(xy[: n + 1], xy[n + 1:])


coords = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@st.composite
def samples(draw, max_n=4, max_m=8):
    n = draw(st.integers(0, max_n))
    m = draw(st.integers(1, max_m))
    pts = draw(st.lists(st.tuples(coords, coords), min_size=n + 1 + m, max_size=n + 1 + m))
    return sample_from_xy(pts[: n + 1], pts[n + 1:])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion."""
    entry = {"name": request.node.name, "detail": ""}

    def note(detail):
        entry["detail"] = detail

    yield note
    failed = getattr(request.node, "rep_call", None)
    status = "FAIL" if failed is None or failed.failed else "PASS"
    ACCEPTANCE_LINES.append(f"{status}  {entry['name']}  {entry['detail']}")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

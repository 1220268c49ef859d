import numpy as np
import pytest

from thurston_flows.geometry import DiagonalMetric

FLOWABLE = ["nil", "sol", "sl2tilde", "isome2tilde"]


def random_point(kind, rng, half=2.0):
    p = rng.uniform(-half, half, 3)
    if kind == "sl2tilde":
        p[1] = np.exp(rng.uniform(-1.0, 1.0))
    return p


def random_element(kind, rng, half=2.0):
    g = rng.uniform(-half, half, 3)
    if kind == "sl2tilde":
        g[1] = np.exp(rng.uniform(-1.0, 1.0))
        g[2] = rng.uniform(-7.0, 7.0)
    return tuple(g)


def random_metric(rng, lo=0.1, hi=10.0):
    return DiagonalMetric(*rng.uniform(lo, hi, 3))


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])

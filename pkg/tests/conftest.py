import numpy as np
import pytest
from hypothesis import strategies as st

from gextremal.core import Mobius, PointG


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def disc_points(radius=0.95):
    """Hypothesis strategy for complex numbers with |z| < radius."""
    return st.tuples(st.floats(0, radius), st.floats(0, 2 * np.pi)).map(
        lambda t: complex(t[0] * np.cos(t[1]), t[0] * np.sin(t[1])))


def g_points(radius=0.95):
    return st.tuples(disc_points(radius), disc_points(radius)).map(lambda p: PointG(p[0] + p[1], p[0] * p[1]))


def unimodular():
    return st.floats(0, 2 * np.pi).map(lambda t: complex(np.cos(t), np.sin(t)))


def mobius_maps(radius=0.9):
    return st.tuples(unimodular(), disc_points(radius)).map(lambda p: Mobius(*p))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import REPORT

    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)

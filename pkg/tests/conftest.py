import numpy as np
import pytest

from ahc.medium import make_medium
from ahc.potential import DoubleWell, TransitionProfile

CHECKER = {"values": [1.0, 2.0], "lambda": 1.0, "Lambda_cap": 4.0}


@pytest.fixture
def W():
    return DoubleWell()


@pytest.fixture
def q():
    return TransitionProfile()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def all_media(d=2):
    """One realization of every kind, all in the class lambda = 1, Lambda_cap = 4."""
    base = {"lambda": 1.0, "Lambda_cap": 4.0}
    pattern = [[0, 1], [1, 0]] if d == 2 else [[[0, 1], [1, 0]], [[1, 0], [0, 1]]]
    return {
        "constant": make_medium("constant", dict(base, value=1.5), 0),
        "periodic": make_medium("periodic", dict(base, values=[1.0, 2.0], pattern=pattern, offset=[0.25] * d), 0),
        "checkerboard": make_medium("random_checkerboard", dict(base, values=[1.0, 2.0], cell_size=0.7), 42),
        "elliptic": make_medium("random_checkerboard", dict(base, values=[[1.0, 4.0], [2.0, 1.5]]), 7)
        if d == 2 else make_medium("random_checkerboard", dict(base, values=[1.0, 2.0]), 7),
        "voronoi": make_medium("poisson_voronoi", dict(base, values=[1.0, 1.5, 2.0], intensity=0.8), 3),
    }


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

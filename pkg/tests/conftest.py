import numpy as np
import pytest

from padic_feller.radial import RadialFunction


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_step(rng, p, n, lo=-2, hi=2, complex_=False):
    """Random radial step function on shells [lo, hi] with a random inner constant."""
    K = hi - lo + 1
    vals = rng.uniform(-1, 1, K)
    if complex_:
        vals = vals + 1j * rng.uniform(-1, 1, K)
    return RadialFunction(p, n, lo, vals, inner=complex(vals[0]) if complex_ else float(rng.uniform(-1, 1)))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

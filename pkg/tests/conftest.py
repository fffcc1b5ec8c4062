import numpy as np
import pytest

from fibregate.model import SystemParams


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def swap_params():
    return SystemParams(g1=1.0, g2=1.0, nu=1.1, detuning=0.0)


@pytest.fixture
def cphase_params():
    return SystemParams(g1=1.0, g2=1.5, nu=100.0, detuning=10.0)


def random_params(rng, dissipative=False):
    g1 = rng.uniform(0.2, 2.0) * np.exp(1j * rng.uniform(0, 2 * np.pi))
    g2 = rng.uniform(0.2, 2.0) * np.exp(1j * rng.uniform(0, 2 * np.pi))
    kw = {}
    if dissipative:
        kw = dict(kappa=rng.uniform(0, 0.05), gamma=rng.uniform(0, 0.05), beta=rng.uniform(0, 0.05))
    return SystemParams(g1=g1, g2=g2, nu=rng.uniform(0, 5), detuning=rng.uniform(-3, 3),
                        phi=rng.uniform(0, 2 * np.pi), **kw)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in sorted(REPORT, key=lambda l: l.split()[1]):
            terminalreporter.write_line(line)

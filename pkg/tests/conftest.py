import numpy as np
import pytest

from gmfg.env import TabularModel

ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE:
        terminalreporter.write_line(line)


def random_toy(rng, X=2, U=2, T=3, coupled=True):
    """Random tabular model whose reward and transitions both depend on G."""
    P = rng.dirichlet(np.ones(X), size=(X, U))
    r = rng.normal(size=(X, U))
    coupling = rng.normal(size=(X, U, X)) if coupled else None
    infection = rng.uniform(0, 1, size=(X, U)) if coupled else None
    mu0 = rng.dirichlet(np.ones(X))
    return TabularModel(P, r, mu0, T, coupling=coupling, infection=infection)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

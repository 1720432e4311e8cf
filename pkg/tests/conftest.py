import numpy as np
import pytest


@pytest.fixture(scope="session")
def rng0():
    return np.random.default_rng(20260808)


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: full acceptance-gate runs")

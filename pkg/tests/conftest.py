import numpy as np
import pytest

from magpilot.sim import SimConfig, build_workspace


@pytest.fixture(scope="session")
def ws_a():
    return build_workspace("A")


@pytest.fixture(scope="session")
def ws_b():
    return build_workspace("B")


@pytest.fixture(scope="session")
def ws_c():
    return build_workspace("C")


@pytest.fixture()
def cfg():
    return SimConfig()


@pytest.fixture()
def rng():
    return np.random.Generator(np.random.PCG64(1234))

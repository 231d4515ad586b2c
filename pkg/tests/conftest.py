import warnings

import pytest

from pcmass import Constant, LayerStack, empty_lattice


@pytest.fixture
def vacuum_stack():
    return empty_lattice(100.0)


@pytest.fixture
def n3_stack():
    return LayerStack(50.0, 50.0, Constant(3.0))


@pytest.fixture(autouse=True)
def _quiet_clamp_warnings():
    # tabulated hosts warn once when queried below their first sample
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message=".*query below first sample.*")
        yield

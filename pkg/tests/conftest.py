import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from chaosrates import ChaosOrder, ChaosSpec, ExpPoly
from chaosrates.registry import get_model

# generator parameters used throughout: yields ~3.1%, ATM vols ~19-20%
B4_THETA = (0.1, 0.022, 0.006, 0.045, 0.055, 0.03)


@pytest.fixture(scope="session")
def b4_spec():
    return get_model("B4").build(B4_THETA)


@pytest.fixture(scope="session")
def first_spec():
    """First chaos with phi1 = e^{-s}: flat short rate 2."""
    return ChaosSpec(ChaosOrder.FIRST, alpha=ExpPoly.single((1.0,), 1.0))


@pytest.fixture(scope="session")
def second_one_var_spec():
    """alpha = beta = e^{-s}: psi = (1+s) e^{-2s}."""
    return ChaosSpec(
        ChaosOrder.SECOND_ONE_VAR,
        alpha=ExpPoly.single((1.0,), 1.0),
        beta=ExpPoly.single((1.0,), 1.0),
    )

import numpy as np
import pytest

from robinflow.grid import Grid
from robinflow.nonlinearity import builtin

# high-precision reference values (30-digit root solves of the closed forms)
MU1_GAMMA1 = 1.38209787789084076
MU1_GAMMA3 = 9.52118325960907012
MU2_GAMMA3 = 5.63412184700838502
C_BRANCH1_LAM0 = 0.700955474910281891
ENERGY_U1_LAM0 = -1.08595609845434173
PHI1_MIDPOINT = 0.886818883970073909
LAMBDA_C1 = 0.110322573904280329


@pytest.fixture(scope="session")
def arctan():
    return builtin("arctan")


@pytest.fixture(scope="session")
def grid200():
    return Grid(200)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

import numpy as np
import pytest

import config
from dirac.catalog import LINE_INTERVAL, example, free_spinor
from dirac.potential import dirac_oscillator, free_mass

config.configure_logging("WARNING")


@pytest.fixture
def free_seed():
    return free_mass(1.0)


@pytest.fixture
def oscillator_seed():
    return dirac_oscillator(2.0)


@pytest.fixture
def line_grid():
    return np.linspace(LINE_INTERVAL[0], LINE_INTERVAL[1], 201)


@pytest.fixture(scope="module")
def one_soliton():
    return example("ex1")


@pytest.fixture
def plane_spinors(free_seed):
    """Seed solutions away from the transformation levels of ex1"""
    return [free_spinor(free_seed, kind, energy)
            for kind, energy in (("decay", 0.3), ("grow", -0.2), ("cosh", 0.7), ("sinh", -0.6))]

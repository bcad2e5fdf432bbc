"""Shared fixtures: the two operating-point fibers and the pump pair."""

import numpy as np
import pytest

from oamfwm import PumpConfig
from oamfwm.fiber_modes import FiberSpec


@pytest.fixture(scope="session")
def fiber():
    """Low-contrast 20 um core: the grating/JSI operating point."""
    return FiberSpec(core_index=1.45, clad_index=1.44, core_radius=20e-6)


@pytest.fixture(scope="session")
def table_fiber():
    """9 um core guiding exactly the m <= 4 OAM set at 1.5 um: the
    operating point the reference overlap tables correspond to."""
    return FiberSpec(core_index=1.45, clad_index=1.44, core_radius=9e-6)


@pytest.fixture(scope="session")
def pump():
    return PumpConfig(lambda1=1.5e-6, lambda2=0.5e-6, length=0.02)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260814)

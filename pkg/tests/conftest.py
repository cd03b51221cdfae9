import json
from pathlib import Path

import numpy as np
import pytest

from spdc_slm import EmissionAngles, degenerate_cone_angle, lock_pump_phase, default_source

DATA = Path(__file__).with_name("data")


@pytest.fixture(scope="session")
def oracle_values():
    return json.loads((DATA / "oracle_values.json").read_text())


@pytest.fixture(scope="session")
def source():
    return default_source()


@pytest.fixture(scope="session")
def cone(source):
    return degenerate_cone_angle(source.crystal_H, source.pump_wavelength)


@pytest.fixture(scope="session")
def locked(source, cone):
    return lock_pump_phase(source, EmissionAngles(cone, 0.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

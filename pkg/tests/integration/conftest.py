import math

import pytest

from smaglab.config import SimParams
from smaglab.initial import InitialSpec
from smaglab.integrator import SchemeConfig
from smaglab.smagorinsky import ForcingSpec, SmagorinskyParams
from smaglab.spectral import Grid


@pytest.fixture
def forced_smagorinsky() -> SimParams:
    # smooth random data, moderately nonlinear, well inside the stability region at dt = 0.01
    return SimParams(
        grid=Grid(32),
        physics=SmagorinskyParams(nu=0.01, c_s=0.17),
        scheme=SchemeConfig(t_end=0.5, dt=0.01),
        forcing=ForcingSpec.single_mode((1, 2), 1.0),
        initial=InitialSpec("random-spectrum", amplitude=math.pi, peak_k=3.0, seed=11),
    )

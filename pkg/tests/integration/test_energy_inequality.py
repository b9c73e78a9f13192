import itertools

import pytest

from smaglab.initial import InitialSpec
from smaglab.integrator import SchemeConfig, integrate
from smaglab.ledger import verify_energy_inequality
from smaglab.smagorinsky import ForcingSpec, SmagorinskyParams
from smaglab.spectral import Grid, l2_inner, poincare_constant

GRID = Grid(64)

BATTERY = list(
    itertools.product(
        [InitialSpec("taylor-green"), InitialSpec("random-spectrum", amplitude=2.0, seed=5)],
        [0.0, 0.17],
        [0.1, 0.01],
        [ForcingSpec(), ForcingSpec.single_mode((1, 2), 1.0)],
    )
)


@pytest.mark.slow
@pytest.mark.parametrize("initial, c_s, nu, forcing", BATTERY)
def test_energy_inequality_battery(initial: InitialSpec, c_s: float, nu: float, forcing: ForcingSpec):
    u0 = initial.build(GRID)
    p = SmagorinskyParams(nu=nu, c_s=c_s)
    _, series = integrate(u0, forcing, p, SchemeConfig(t_end=1.0, dt=2e-3), record_every=5)
    report = verify_energy_inequality(series, l2_inner(u0, u0), nu, c_p=poincare_constant(GRID))
    assert report.passed
    assert report.measured["max_violation_rel"] <= 1e-8
    assert report.measured["factor"] == pytest.approx(2.0 / nu)

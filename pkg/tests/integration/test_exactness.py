import dataclasses
import math

import numpy as np
import pytest

from smaglab.config import SimParams
from smaglab.initial import taylor_green
from smaglab.integrator import SchemeConfig, integrate
from smaglab.ledger import verify_energy_identity
from smaglab.smagorinsky import ForcingSpec, SmagorinskyParams
from smaglab.spectral import Grid, SpectralVelocity, l2_inner

NU = 0.1


def vortex_series(dt: float):
    p = SmagorinskyParams(nu=NU, c_s=0.0)
    _, series = integrate(taylor_green(Grid(64)), ForcingSpec(), p, SchemeConfig(t_end=1.0, dt=dt))
    return series


@pytest.mark.slow
def test_taylor_green_follows_the_closed_form():
    u0 = taylor_green(Grid(64))
    p = SmagorinskyParams(nu=NU, c_s=0.0)
    worst = 0.0

    def compare(state, rec):
        nonlocal worst
        exact = u0.coeffs * math.exp(-2.0 * NU * state.t)
        diff = SpectralVelocity(u0.grid, state.u.coeffs - exact)
        worst = max(worst, math.sqrt(l2_inner(diff, diff)))

    state, series = integrate(u0, ForcingSpec(), p, SchemeConfig(t_end=1.0, dt=1e-3), [compare])
    assert state.t == 1.0
    assert len(series) == 1001
    assert worst <= 1e-6


@pytest.mark.slow
def test_taylor_green_identity_is_at_rounding_level():
    series = vortex_series(2e-3)
    companion = vortex_series(1e-3)
    report = verify_energy_identity(series, 2e-3, 4, companion=companion)
    assert report.passed
    assert report.measured["pairing"] == "simpson"

    finest = vortex_series(5e-4)
    assert verify_energy_identity(companion, 1e-3, 4, companion=finest).passed


@pytest.mark.slow
@pytest.mark.parametrize("method, order", [("if-rk4", 4), ("if-rk3", 3)])
def test_identity_residual_has_the_scheme_order(forced_smagorinsky: SimParams, method: str, order: int):
    def series_at(dt: float):
        scheme = dataclasses.replace(forced_smagorinsky.scheme, method=method, dt=dt)
        u0 = forced_smagorinsky.initial.build(forced_smagorinsky.grid)
        _, series = integrate(u0, forced_smagorinsky.forcing, forced_smagorinsky.physics, scheme)
        return series

    report = verify_energy_identity(series_at(0.01), 0.01, order, companion=series_at(0.005))
    assert not report.flags.get("roundoff", False)
    assert report.measured["observed_order"] == pytest.approx(order, abs=0.3)
    assert report.passed


@pytest.mark.slow
def test_runs_are_reproducible(forced_smagorinsky: SimParams):
    u0 = forced_smagorinsky.initial.build(forced_smagorinsky.grid)
    args = (forced_smagorinsky.forcing, forced_smagorinsky.physics, forced_smagorinsky.scheme)
    a, series_a = integrate(u0, *args)
    b, series_b = integrate(forced_smagorinsky.initial.build(forced_smagorinsky.grid), *args)
    assert np.array_equal(a.u.coeffs, b.u.coeffs)
    assert series_a == series_b

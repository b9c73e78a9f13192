import math

import numpy as np
import pytest

from smaglab.error import ConfigError
from smaglab.initial import single_mode
from smaglab.smagorinsky import (
    ForcingMode,
    ForcingSpec,
    SmagorinskyParams,
    advection_term,
    assemble_rhs,
    dissipation_functionals,
    eddy_viscosity_term,
    gradient_magnitude,
    recover_pressure,
)
from smaglab.spectral import Grid, SpectralVelocity, inverse_transform, l2_inner


@pytest.mark.parametrize(
    "kwargs, key",
    [
        ({"nu": 0.0}, "physics.nu"),
        ({"nu": 0.1, "c_s": -0.1}, "physics.c_s"),
        ({"nu": 0.1, "delta": 0.0}, "physics.delta"),
        ({"nu": 0.1, "grad_variant": "max"}, "physics.grad_variant"),
        ({"nu": 0.1, "padding": 0.5}, "physics.padding"),
        ({"nu": 0.1, "padding": math.inf}, "physics.padding"),
    ],
)
def test_params_validation(kwargs: dict, key: str):
    with pytest.raises(ConfigError) as exc:
        SmagorinskyParams(**kwargs)
    assert exc.value.key == key


def test_negative_c_s_message():
    with pytest.raises(ConfigError, match="c_s must be ≥ 0"):
        SmagorinskyParams(nu=0.1, c_s=-0.1)


def test_filter_width_defaults_to_grid_spacing(grid: Grid):
    p = SmagorinskyParams(nu=0.1, c_s=0.2)
    assert p.filter_width(grid) == grid.dx
    assert p.eddy_coefficient(grid) == pytest.approx((0.2 * grid.dx) ** 2)
    assert SmagorinskyParams(nu=0.1, delta=0.5).filter_width(grid) == 0.5


def test_forcing_mode_shape(grid: Grid):
    f = ForcingSpec.single_mode((0, 1), 2.0).coefficients(grid)
    values = f.to_real().values
    np.testing.assert_allclose(values[0], 2.0 * np.sin(grid.points[1]), atol=1e-14)
    assert np.max(np.abs(values[1])) < 1e-14
    f.check()


def test_multi_mode_forcing_is_divergence_free(grid: Grid):
    spec = ForcingSpec("steady-multi-mode", (ForcingMode((1, 2), 0.5), ForcingMode((-3, 1), 1.5)))
    spec.coefficients(grid).check()
    assert not spec.is_zero


def test_forcing_outside_band_is_rejected(grid: Grid):
    with pytest.raises(ConfigError, match="outside the resolved band"):
        ForcingSpec.single_mode((0, 6), 1.0).coefficients(grid)


@pytest.mark.parametrize(
    "kind, modes",
    [
        ("zero", (ForcingMode((0, 1), 1.0),)),
        ("steady-mode", ()),
        ("steady-multi-mode", ()),
        ("gusty", ()),
    ],
)
def test_forcing_spec_validation(kind: str, modes: tuple):
    with pytest.raises(ConfigError):
        ForcingSpec(kind, modes)  # type: ignore[arg-type]


def test_zero_wavevector_is_rejected():
    with pytest.raises(ConfigError):
        ForcingMode((0, 0), 1.0)


def test_gradient_magnitude_variants():
    a = 3.0
    shear = np.zeros((2, 2, 1, 1))
    shear[0, 1] = a
    rotation = np.zeros((2, 2, 1, 1))
    rotation[0, 1] = a
    rotation[1, 0] = -a

    assert gradient_magnitude(shear, "frobenius")[0, 0] == pytest.approx(a)
    assert gradient_magnitude(shear, "strain-rate")[0, 0] == pytest.approx(a)
    assert gradient_magnitude(rotation, "frobenius")[0, 0] == pytest.approx(math.sqrt(2.0) * a)
    assert gradient_magnitude(rotation, "strain-rate")[0, 0] == pytest.approx(0.0)


def test_vortex_advection_is_a_gradient(vortex: SpectralVelocity):
    p = SmagorinskyParams(nu=0.1, c_s=0.0)
    rhs = assemble_rhs(vortex, ForcingSpec(), p)
    assert np.max(np.abs(rhs.coeffs)) < 1e-12
    assert np.max(np.abs(advection_term(vortex).coeffs)) > 0.1


def test_advection_conserves_energy(turbulent: SpectralVelocity):
    adv = advection_term(turbulent)
    assert abs(l2_inner(adv, turbulent)) < 1e-12


def test_eddy_term_vanishes_without_model(turbulent: SpectralVelocity):
    off = eddy_viscosity_term(turbulent, SmagorinskyParams(nu=0.1, c_s=0.0))
    assert not np.any(off.coeffs)
    zero = eddy_viscosity_term(SpectralVelocity.zeros(turbulent.grid), SmagorinskyParams(nu=0.1))
    assert not np.any(zero.coeffs)


@pytest.mark.parametrize("variant", ["frobenius", "strain-rate"])
def test_eddy_term_dissipates_what_the_functional_reports(turbulent: SpectralVelocity, variant: str):
    p = SmagorinskyParams(nu=0.1, c_s=0.5, grad_variant=variant)  # type: ignore[arg-type]
    eddy = eddy_viscosity_term(turbulent, p)
    _, smag = dissipation_functionals(turbulent, p)
    assert smag > 0
    assert -l2_inner(eddy, turbulent) == pytest.approx(smag, rel=1e-10)


@pytest.mark.parametrize("scale", [0.25, 2.0, 10.0])
def test_eddy_term_is_quadratic_in_the_velocity(turbulent: SpectralVelocity, scale: float):
    p = SmagorinskyParams(nu=0.1, c_s=0.17)
    base = eddy_viscosity_term(turbulent, p).coeffs
    scaled = eddy_viscosity_term(SpectralVelocity(turbulent.grid, scale * turbulent.coeffs), p).coeffs
    assert np.max(np.abs(scaled - scale**2 * base)) <= 1e-12 * scale**2 * np.max(np.abs(base))


def test_eddy_term_of_shear():
    grid = Grid(64)
    y = grid.points[1]
    u = single_mode(grid, (0, 1), 1.0)
    # c_s delta = 0.1: div((c_s delta)^2 |cos y| cos y e_x e_y) = -0.02 |cos y| sin y e_x
    p = SmagorinskyParams(nu=0.1, c_s=1.0, delta=0.1)
    values = inverse_transform(eddy_viscosity_term(u, p)).values
    np.testing.assert_allclose(values[0], -0.02 * np.abs(np.cos(y)) * np.sin(y), atol=1e-3)
    assert np.max(np.abs(values[1])) < 1e-14


def test_dissipation_of_shear():
    grid = Grid(32)
    u = single_mode(grid, (0, 1), 1.0)
    p = SmagorinskyParams(nu=0.1, c_s=1.0, delta=0.1)
    visc, smag = dissipation_functionals(u, p)
    assert visc == pytest.approx(0.1 * 2.0 * math.pi**2, rel=1e-12)
    # (C_S delta)^2 * integral |cos y|^3 = 0.01 * 16 pi / 3
    assert smag == pytest.approx(0.01 * 16.0 * math.pi / 3.0, rel=1e-4)


def test_rhs_is_projected_and_band_limited(turbulent: SpectralVelocity):
    grid = turbulent.grid
    f = ForcingSpec.single_mode((1, 1), 1.0)
    rhs = assemble_rhs(turbulent, f, SmagorinskyParams(nu=0.01))
    rhs.check()
    assert not np.any(rhs.coeffs[:, ~grid.dealias_mask])


def test_rhs_of_zero_state_is_the_forcing(grid: Grid):
    f = ForcingSpec.single_mode((0, 2), 1.0)
    rhs = assemble_rhs(SpectralVelocity.zeros(grid), f, SmagorinskyParams(nu=0.1))
    np.testing.assert_allclose(rhs.coeffs, f.coefficients(grid).coeffs, atol=1e-15)


def test_vortex_pressure(vortex: SpectralVelocity):
    grid = vortex.grid
    x, y = grid.points
    p = recover_pressure(vortex, ForcingSpec(), SmagorinskyParams(nu=0.1, c_s=0.0))
    np.testing.assert_allclose(p.values, 0.25 * (np.cos(2 * x) + np.cos(2 * y)), atol=1e-12)


def test_pressure_of_pure_forcing_vanishes(grid: Grid):
    f = ForcingSpec.single_mode((1, 2), 1.0)
    p = recover_pressure(SpectralVelocity.zeros(grid), f, SmagorinskyParams(nu=0.1))
    assert np.max(np.abs(p.values)) < 1e-14


import math

import numpy as np
import pytest

from smaglab.error import BlowUpError, ConfigError, UsageError
from smaglab.initial import RandomICSpec, random_spectrum, single_mode, taylor_green
from smaglab.integrator import SchemeConfig, SimState, TrajectoryIterator, cfl_dt, integrate, step
from smaglab.smagorinsky import ForcingSpec, SmagorinskyParams
from smaglab.spectral import Grid, SpectralVelocity


@pytest.fixture
def stokes() -> SmagorinskyParams:
    return SmagorinskyParams(nu=0.1, c_s=0.0)


@pytest.mark.parametrize(
    "kwargs, key",
    [
        ({"t_end": -1.0}, "scheme.t_end"),
        ({"t_end": 1.0, "dt": 0.0}, "scheme.dt"),
        ({"t_end": 1.0, "dt": None}, "scheme.dt"),
        ({"t_end": 1.0, "cfl": 1.5}, "scheme.cfl"),
        ({"t_end": 1.0, "method": "euler"}, "scheme.method"),
        ({"t_end": 1.0, "dt_max": 0.0}, "scheme.dt_max"),
        ({"t_end": 1.0, "dt": math.inf}, "scheme.dt"),
        ({"t_end": 1.0, "dt": math.nan}, "scheme.dt"),
        ({"t_end": 1.0, "cfl": 0.5, "dt": math.inf}, "scheme.dt"),
        ({"t_end": 1.0, "cfl": 0.5, "dt_max": math.inf}, "scheme.dt_max"),
    ],
)
def test_scheme_validation(kwargs: dict, key: str):
    with pytest.raises(ConfigError) as exc:
        SchemeConfig(**kwargs)
    assert exc.value.key == key


def test_scheme_order():
    assert SchemeConfig(t_end=1.0).order == 4
    assert SchemeConfig(t_end=1.0, method="if-rk3").order == 3
    assert SchemeConfig(t_end=1.0, cfl=0.5).adaptive


def test_zero_is_a_fixed_point(grid: Grid):
    state = SimState(0.0, SpectralVelocity.zeros(grid))
    new = step(state, 0.1, ForcingSpec(), SmagorinskyParams(nu=0.01), SchemeConfig(t_end=1.0))
    assert new.t == pytest.approx(0.1)
    assert new.step_index == 1
    assert not np.any(new.u.coeffs)


def test_step_rejects_nonpositive_dt(shear: SpectralVelocity, stokes: SmagorinskyParams):
    with pytest.raises(UsageError):
        step(SimState(0.0, shear), 0.0, ForcingSpec(), stokes, SchemeConfig(t_end=1.0))


@pytest.mark.parametrize("method", ["if-rk4", "if-rk3"])
def test_single_mode_decays_exactly(shear: SpectralVelocity, stokes: SmagorinskyParams, method: str):
    scheme = SchemeConfig(t_end=1.0, method=method, dt=0.1)  # type: ignore[arg-type]
    state, _ = integrate(shear, ForcingSpec(), stokes, scheme)
    assert state.t == 1.0
    expected = shear.coeffs * math.exp(-0.1 * 1.0)
    assert np.max(np.abs(state.u.coeffs - expected)) < 1e-14


def test_vortex_decays_exactly(vortex: SpectralVelocity, stokes: SmagorinskyParams):
    state, series = integrate(vortex, ForcingSpec(), stokes, SchemeConfig(t_end=0.5, dt=0.01))
    expected = vortex.coeffs * math.exp(-2.0 * 0.1 * 0.5)
    assert np.max(np.abs(state.u.coeffs - expected)) < 1e-12
    assert series[-1].energy == pytest.approx(math.pi**2 * math.exp(-4.0 * 0.1 * 0.5), rel=1e-10)


def test_zero_horizon_is_a_no_op(vortex: SpectralVelocity, stokes: SmagorinskyParams):
    state, series = integrate(vortex, ForcingSpec(), stokes, SchemeConfig(t_end=0.0))
    assert series == []
    assert state.t == 0.0
    assert state.u is vortex


def test_record_cadence(turbulent: SpectralVelocity, stokes: SmagorinskyParams):
    _, series = integrate(turbulent, ForcingSpec(), stokes, SchemeConfig(t_end=0.1, dt=0.01), record_every=5)
    assert [r.t for r in series] == pytest.approx([0.0, 0.05, 0.1])

    _, series = integrate(turbulent, ForcingSpec(), stokes, SchemeConfig(t_end=0.12, dt=0.01), record_every=5)
    assert [r.t for r in series] == pytest.approx([0.0, 0.05, 0.1, 0.12])


def test_record_cadence_must_be_positive(turbulent: SpectralVelocity, stokes: SmagorinskyParams):
    with pytest.raises(ConfigError):
        integrate(turbulent, ForcingSpec(), stokes, SchemeConfig(t_end=0.1), record_every=0)


def test_sobolev_norms_are_recorded(turbulent: SpectralVelocity, stokes: SmagorinskyParams):
    _, series = integrate(turbulent, ForcingSpec(), stokes, SchemeConfig(t_end=0.02, dt=0.01), s_list=(1.0, 2.0))
    assert all(set(r.hs) == {1.0, 2.0} for r in series)
    assert all(r.hs[2.0] >= r.hs[1.0] for r in series)


def test_runs_are_deterministic(turbulent: SpectralVelocity):
    p = SmagorinskyParams(nu=0.01, c_s=0.17)
    f = ForcingSpec.single_mode((1, 2), 0.5)
    scheme = SchemeConfig(t_end=0.1, dt=0.01)
    a, series_a = integrate(turbulent, f, p, scheme)
    b, series_b = integrate(turbulent, f, p, scheme)
    assert np.array_equal(a.u.coeffs, b.u.coeffs)
    assert series_a == series_b


def test_unforced_energy_does_not_grow(turbulent: SpectralVelocity):
    p = SmagorinskyParams(nu=0.01, c_s=0.17)
    _, series = integrate(turbulent, ForcingSpec(), p, SchemeConfig(t_end=0.5, dt=0.01))
    energies = [r.energy for r in series]
    assert all(b <= a * (1.0 + 1e-10) for a, b in zip(energies, energies[1:]))


def test_state_stays_a_velocity(turbulent: SpectralVelocity):
    p = SmagorinskyParams(nu=0.01)
    state, _ = integrate(turbulent, ForcingSpec.single_mode((1, 1), 1.0), p, SchemeConfig(t_end=0.1, dt=0.01))
    state.u.check()


def test_local_error_is_fourth_order(turbulent: SpectralVelocity):
    p = SmagorinskyParams(nu=0.01, c_s=0.0)
    scheme = SchemeConfig(t_end=1.0)
    start = SimState(0.0, turbulent)

    def local_error(dt: float) -> float:
        one = step(start, dt, ForcingSpec(), p, scheme)
        half = step(step(start, dt / 2, ForcingSpec(), p, scheme), dt / 2, ForcingSpec(), p, scheme)
        return float(np.max(np.abs(one.u.coeffs - half.u.coeffs)))

    assert local_error(0.05) / local_error(0.025) > 16.0


def test_cfl_dt_scales_with_grid_spacing():
    p = SmagorinskyParams(nu=0.1, c_s=0.0)
    scheme = SchemeConfig(t_end=1.0, cfl=0.5, dt_max=10.0)
    coarse = cfl_dt(SimState(0.0, taylor_green(Grid(16))), scheme, p)
    fine = cfl_dt(SimState(0.0, taylor_green(Grid(32))), scheme, p)
    # max |u| = 1 is sampled exactly on both grids
    assert coarse == pytest.approx(0.5 * Grid(16).dx, rel=1e-12)
    assert coarse / fine == pytest.approx(2.0, rel=1e-12)


def test_cfl_dt_of_rest_is_capped(grid: Grid):
    scheme = SchemeConfig(t_end=1.0, cfl=0.5, dt_max=0.25)
    assert cfl_dt(SimState(0.0, SpectralVelocity.zeros(grid)), scheme, SmagorinskyParams(nu=0.1)) == 0.25


def test_cfl_dt_smagorinsky_limit(vortex: SpectralVelocity):
    scheme = SchemeConfig(t_end=1.0, cfl=1.0, dt_max=10.0)
    plain = cfl_dt(SimState(0.0, vortex), scheme, SmagorinskyParams(nu=0.1, c_s=0.0))
    strong = cfl_dt(SimState(0.0, vortex), scheme, SmagorinskyParams(nu=0.1, c_s=1.0, delta=10.0))
    assert strong < plain


def test_cfl_dt_needs_a_cfl_number(vortex: SpectralVelocity):
    with pytest.raises(UsageError):
        cfl_dt(SimState(0.0, vortex), SchemeConfig(t_end=1.0), SmagorinskyParams(nu=0.1))


@pytest.mark.parametrize("c_s", [0.0, 0.17])
def test_cfl_dt_of_an_overflowing_field_is_a_blow_up(grid: Grid, c_s: float):
    # finite samples of size 1e308 whose gradient overflows
    huge = single_mode(grid, (0, 5), 1e308)
    state = SimState(0.5, huge, 7)
    scheme = SchemeConfig(t_end=1.0, cfl=0.5)
    with pytest.raises(BlowUpError) as exc:
        cfl_dt(state, scheme, SmagorinskyParams(nu=0.1, c_s=c_s))
    assert exc.value.t == 0.5
    assert exc.value.step_index == 7

    it = TrajectoryIterator(state, forcing=ForcingSpec(), params=SmagorinskyParams(nu=0.1, c_s=c_s), scheme=scheme)
    with pytest.raises(BlowUpError):
        next(it)


def test_adaptive_run_lands_on_t_end(turbulent: SpectralVelocity):
    scheme = SchemeConfig(t_end=0.3, cfl=0.5, dt_max=0.07)
    state, series = integrate(turbulent, ForcingSpec(), SmagorinskyParams(nu=0.01), scheme)
    assert state.t == 0.3
    assert series[-1].t == 0.3
    assert state.step_index >= 5


def test_trajectory_iterator_limit(vortex: SpectralVelocity, stokes: SmagorinskyParams):
    it = TrajectoryIterator(
        SimState(0.0, vortex),
        forcing=ForcingSpec(),
        params=stokes,
        scheme=SchemeConfig(t_end=1.0, dt=0.01),
        limit=3,
    )
    states = list(it)
    assert [s.step_index for s in states] == [1, 2, 3]
    assert not it.finished
    assert it.state is states[-1]


def test_observers_see_every_step(vortex: SpectralVelocity, stokes: SmagorinskyParams):
    seen: list[tuple[int, bool]] = []

    def observer(state, rec):
        seen.append((state.step_index, rec is not None))

    integrate(vortex, ForcingSpec(), stokes, SchemeConfig(t_end=0.04, dt=0.01), [observer], record_every=2)
    assert seen == [(1, False), (2, True), (3, False), (4, True)]


def test_blow_up_keeps_the_partial_series(grid: Grid):
    u0 = random_spectrum(grid, RandomICSpec(amplitude=100.0, seed=3))
    p = SmagorinskyParams(nu=0.001, c_s=0.17)
    with pytest.raises(BlowUpError) as exc:
        integrate(u0, ForcingSpec(), p, SchemeConfig(t_end=1000.0, dt=5.0))
    assert exc.value.t > 0
    assert exc.value.step_index >= 1
    assert len(exc.value.series) >= 1
    assert exc.value.series[0].t == 0.0

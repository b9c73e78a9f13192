"""Integrating-factor Runge-Kutta time stepping of the Galerkin system.

The viscous term is diagonal in Fourier space and is integrated exactly with
the factor exp(-nu |k|^2 h); the projected nonlinear and forcing terms go
through the explicit stages of a Lawson-type Runge-Kutta method.
"""

import dataclasses
import functools
import logging
import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .error import BlowUpError, ConfigError, UsageError
from .ledger import EnergyRecord, record
from .smagorinsky import ForcingSpec, SmagorinskyParams, assemble_rhs, gradient_magnitude
from .spectral import Grid, SpectralVelocity, gradient, leray_project
from .types import SchemeMethod

logger = logging.getLogger("smaglab")

U_FLOOR = 1e-8
SMAG_EPS = 1e-300
TIME_EPS = 1e-12


@dataclass(frozen=True)
class SimState:
    """Galerkin state at one instant."""

    t: float
    u: SpectralVelocity
    step_index: int = 0


@dataclass(frozen=True)
class SchemeConfig:
    """Time-stepping settings.

    A fixed step `dt` is used unless `cfl` is given, in which case every step
    is chosen by `cfl_dt` and capped by `dt_max`.
    """

    t_end: float
    method: SchemeMethod = "if-rk4"
    dt: float | None = 1e-3
    cfl: float | None = None
    dt_max: float = 0.1

    def __post_init__(self):
        """Validate the settings."""
        if not (math.isfinite(self.t_end) and self.t_end >= 0):
            raise ConfigError("t_end must be >= 0", key="scheme.t_end")
        if self.method not in _TABLEAUX:
            raise ConfigError(f"unknown method {self.method!r}", key="scheme.method")
        if self.cfl is not None and not (0 < self.cfl <= 1):
            raise ConfigError("cfl must lie in (0, 1]", key="scheme.cfl")
        if self.cfl is None and self.dt is None:
            raise ConfigError("dt must be > 0", key="scheme.dt")
        if self.dt is not None and not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigError("dt must be > 0", key="scheme.dt")
        if not (math.isfinite(self.dt_max) and self.dt_max > 0):
            raise ConfigError("dt_max must be > 0", key="scheme.dt_max")

    @property
    def order(self) -> int:
        """Nominal order of accuracy."""
        return _TABLEAUX[self.method].order

    @property
    def adaptive(self) -> bool:
        """Whether steps are chosen from the CFL condition."""
        return self.cfl is not None


@dataclass(frozen=True)
class _Tableau:
    a: tuple[tuple[float, ...], ...]
    b: tuple[float, ...]
    c: tuple[float, ...]
    order: int


_TABLEAUX: dict[str, _Tableau] = {
    "if-rk4": _Tableau(
        a=((), (0.5,), (0.0, 0.5), (0.0, 0.0, 1.0)),
        b=(1 / 6, 1 / 3, 1 / 3, 1 / 6),
        c=(0.0, 0.5, 0.5, 1.0),
        order=4,
    ),
    # Kutta's third-order method
    "if-rk3": _Tableau(
        a=((), (0.5,), (-1.0, 2.0)),
        b=(1 / 6, 2 / 3, 1 / 6),
        c=(0.0, 0.5, 1.0),
        order=3,
    ),
}


@functools.lru_cache(maxsize=64)
def _decay(grid: Grid, nu: float, h: float) -> np.ndarray:
    """Integrating factor exp(-nu |k|^2 h)."""
    e = np.exp(-nu * grid.k_squared * h)
    e.setflags(write=False)
    return e


def step(
    state: SimState,
    dt: float,
    f: ForcingSpec,
    p: SmagorinskyParams,
    scheme: SchemeConfig,
) -> SimState:
    """Advance the Galerkin system by one step.

    Stage j of the Lawson scheme is
    u_j = E(c_j h) u + h sum_l a_jl E((c_j - c_l) h) N(u_l), and the update is
    E(h) u + h sum_l b_l E((1 - c_l) h) N(u_l), with E the viscous factor and N
    the projected right-hand side. All exponents are non-negative multiples of
    -nu |k|^2 h.

    Args:
        state (SimState): current state.
        dt (float): step size, > 0.
        f (ForcingSpec): body force.
        p (SmagorinskyParams): model parameters.
        scheme (SchemeConfig): scheme selection.

    Returns:
        SimState: the state at t + dt.

    """
    if not dt > 0:
        raise UsageError(f"time step must be > 0, got {dt}")
    grid = state.u.grid
    tab = _TABLEAUX[scheme.method]
    u0 = state.u.coeffs

    def decay(c: float) -> np.ndarray:
        return _decay(grid, p.nu, round(c * dt, 15))

    with np.errstate(over="ignore", invalid="ignore"):
        slopes: list[np.ndarray] = []
        for j, cj in enumerate(tab.c):
            uj = decay(cj) * u0
            for ajl, cl, kl in zip(tab.a[j], tab.c, slopes, strict=False):
                if ajl:
                    uj = uj + dt * ajl * decay(cj - cl) * kl
            slopes.append(assemble_rhs(SpectralVelocity(grid, uj), f, p).coeffs)

        new = decay(1.0) * u0
        for bl, cl, kl in zip(tab.b, tab.c, slopes, strict=True):
            new = new + dt * bl * decay(1.0 - cl) * kl

    t = state.t + dt
    if not np.all(np.isfinite(new)):
        raise BlowUpError("velocity became non-finite", t=t, step_index=state.step_index + 1)
    return SimState(t, leray_project(SpectralVelocity(grid, new)), state.step_index + 1)


def cfl_dt(state: SimState, scheme: SchemeConfig, p: SmagorinskyParams) -> float:
    """Step size from the advective CFL condition and the Smagorinsky stability limit.

    dt = min(cfl * dx / max(u_max, 1e-8), dx^2 / (4 (C_S delta)^2 max|grad u|), dt_max).
    The Smagorinsky cap is inactive when C_S = 0.

    Args:
        state (SimState): current state.
        scheme (SchemeConfig): settings with `cfl` set.
        p (SmagorinskyParams): model parameters.

    Returns:
        float: the step size.

    Raises:
        BlowUpError: when the velocity is too large to give a positive step.

    """
    if scheme.cfl is None:
        raise UsageError("cfl_dt needs a configured cfl number")
    grid = state.u.grid
    coef = p.eddy_coefficient(grid)
    g_max = 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        try:
            vel = state.u.to_real().values
            if coef > 0:
                g_max = float(np.max(gradient_magnitude(gradient(state.u).values, p.grad_variant)))
        except UsageError as exc:
            raise BlowUpError(
                f"velocity overflowed: {exc}", t=state.t, step_index=state.step_index
            ) from exc
        u_max = float(np.max(np.sqrt(np.sum(vel**2, axis=0))))
    if not (math.isfinite(u_max) and math.isfinite(g_max)):
        raise BlowUpError(
            "velocity too large for a CFL step", t=state.t, step_index=state.step_index
        )

    dt_adv = scheme.cfl * grid.dx / max(u_max, U_FLOOR)
    dt_smag = math.inf
    if coef > 0:
        dt_smag = grid.dx**2 / (4.0 * coef * g_max + SMAG_EPS)
    dt = min(dt_adv, dt_smag, scheme.dt_max)
    if not dt > 0:
        raise BlowUpError("CFL step underflowed", t=state.t, step_index=state.step_index)
    return dt


class TrajectoryIterator:
    """Iterator over the successive states of a run up to `scheme.t_end`.

    Examples:
        >>> from smaglab.integrator import SchemeConfig, SimState, TrajectoryIterator
        >>> from smaglab.initial import taylor_green
        >>> from smaglab.smagorinsky import ForcingSpec, SmagorinskyParams
        >>> from smaglab.spectral import Grid
        >>> state = SimState(0.0, taylor_green(Grid(16)))
        >>> it = TrajectoryIterator(
        ...     state,
        ...     forcing=ForcingSpec(),
        ...     params=SmagorinskyParams(nu=0.1, c_s=0.0),
        ...     scheme=SchemeConfig(t_end=0.01, dt=1e-3),
        ... )
        >>> [s.step_index for s in it][-1]
        10

    """

    def __init__(
        self,
        state: SimState,
        *,
        forcing: ForcingSpec,
        params: SmagorinskyParams,
        scheme: SchemeConfig,
        limit: int | None = None,
    ):
        """Initialize the trajectory iterator.

        Args:
            state (SimState): starting state.
            forcing (ForcingSpec): body force.
            params (SmagorinskyParams): model parameters.
            scheme (SchemeConfig): time stepping settings.
            limit (int | None, optional): Maximum number of steps returned by the iterator. Defaults to None.

        """
        self._state = state
        self._forcing = forcing
        self._params = params
        self._scheme = scheme
        self._limit = limit
        self._count = 0

    def __iter__(self) -> "TrajectoryIterator":
        """Return the iterator object."""
        return self

    @property
    def state(self) -> SimState:
        """The most recent state."""
        return self._state

    @property
    def finished(self) -> bool:
        """Whether `t_end` has been reached."""
        t_end = self._scheme.t_end
        return t_end - self._state.t <= TIME_EPS * max(1.0, abs(t_end))

    def _next_dt(self) -> tuple[float, bool]:
        if self._scheme.adaptive:
            dt = cfl_dt(self._state, self._scheme, self._params)
        else:
            dt = float(self._scheme.dt)  # type: ignore[arg-type]
        remaining = self._scheme.t_end - self._state.t
        if remaining <= dt * (1.0 + 1e-9):
            return remaining, True
        return dt, False

    def __next__(self) -> SimState:
        """Advance one step and return the new state."""
        if self._limit and self._count >= self._limit:
            raise StopIteration()

        if self.finished:
            raise StopIteration()

        dt, last = self._next_dt()
        state = step(self._state, dt, self._forcing, self._params, self._scheme)
        if last:
            # land on t_end exactly
            state = dataclasses.replace(state, t=self._scheme.t_end)

        self._state = state
        self._count += 1
        return state


Observer = Callable[[SimState, EnergyRecord | None], None]


def _checked_record(state: SimState, f: ForcingSpec, p: SmagorinskyParams, s_list: Sequence[float]) -> EnergyRecord:
    # a finite state can still overflow the quadratic and cubic functionals
    with np.errstate(over="ignore", invalid="ignore"):
        try:
            return record(state, f, p, s_list)
        except UsageError as exc:
            raise BlowUpError(
                f"energy functionals overflowed: {exc}", t=state.t, step_index=state.step_index
            ) from exc


def integrate(
    u0: SpectralVelocity | SimState,
    f: ForcingSpec,
    p: SmagorinskyParams,
    scheme: SchemeConfig,
    observers: Iterable[Observer] = (),
    *,
    s_list: Sequence[float] = (),
    record_every: int = 1,
) -> tuple[SimState, list[EnergyRecord]]:
    """Integrate from `u0` to `scheme.t_end`, recording the energy ledger.

    A record is taken of the starting state and after every `record_every`
    steps (and after the last step). Every observer is called after every step
    with the new state and its record (None when the step is not recorded).

    Args:
        u0 (SpectralVelocity | SimState): initial velocity at t = 0, or a state to resume from.
        f (ForcingSpec): body force.
        p (SmagorinskyParams): model parameters.
        scheme (SchemeConfig): time stepping settings.
        observers (Iterable[Observer], optional): per-step callbacks. Defaults to ().
        s_list (Sequence[float], optional): Sobolev orders to record. Defaults to ().
        record_every (int, optional): record cadence in steps. Defaults to 1.

    Returns:
        tuple[SimState, list[EnergyRecord]]: final state and the recorded series.

    Raises:
        BlowUpError: when the state stops being finite; `series` holds the records gathered so far.

    """
    if record_every < 1:
        raise ConfigError("record cadence must be >= 1", key="outputs.record_every")
    state = u0 if isinstance(u0, SimState) else SimState(0.0, u0, 0)
    observers = list(observers)
    it = TrajectoryIterator(state, forcing=f, params=p, scheme=scheme)
    if it.finished:
        return state, []

    grid = state.u.grid
    logger.info(
        f"Integrating N={grid.N} nu={p.nu} c_s={p.c_s} {scheme.method} "
        f"from t={state.t} to t={scheme.t_end}"
    )
    series = [record(state, f, p, s_list)]
    try:
        for current in it:
            rec = None
            if current.step_index % record_every == 0 or it.finished:
                rec = _checked_record(current, f, p, s_list)
                series.append(rec)
            for observer in observers:
                observer(current, rec)
    except BlowUpError as exc:
        logger.warning(f"Blow-up at t={exc.t} (step {exc.step_index})")
        exc.series = series
        raise

    logger.info(f"Reached t={it.state.t} after {it.state.step_index} steps")
    return it.state, series

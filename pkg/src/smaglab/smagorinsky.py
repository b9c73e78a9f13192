"""Right-hand side of the Navier-Stokes equations with Smagorinsky dissipation.

Sign convention, fixed here and nowhere else: the evolution equation is

    du/dt = nu * Lap(u) + P[ -(u . grad)u + div((C_S delta)^2 |grad u| grad u) + f ]

with P the Leray projector. `assemble_rhs` returns the bracketed, projected
part; the viscous term is integrated exactly by the time integrator.
"""

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .error import ConfigError
from .spectral import (
    Grid,
    RealField,
    SpectralField,
    SpectralVelocity,
    _gradient_coeffs,
    _magnitude,
    _resample,
    inverse_transform,
    leray_project,
)
from .types import ForcingKind, GradVariant


@dataclass(frozen=True)
class SmagorinskyParams:
    """Physical parameters of the eddy-viscosity model.

    `delta` defaults to the grid spacing L/N of the grid the model is applied
    on. `padding` is the zero-padding factor of the grid the non-polynomial
    Smagorinsky stress is evaluated on.
    """

    nu: float
    c_s: float = 0.17
    delta: float | None = None
    grad_variant: GradVariant = "frobenius"
    padding: float = 1.5

    def __post_init__(self):
        """Validate the parameters."""
        if not (math.isfinite(self.nu) and self.nu > 0):
            raise ConfigError("nu must be > 0", key="physics.nu")
        if not (math.isfinite(self.c_s) and self.c_s >= 0):
            raise ConfigError("c_s must be ≥ 0", key="physics.c_s")
        if self.delta is not None and not (math.isfinite(self.delta) and self.delta > 0):
            raise ConfigError("delta must be > 0", key="physics.delta")
        if self.grad_variant not in ("frobenius", "strain-rate"):
            raise ConfigError(
                f"unknown gradient norm {self.grad_variant!r}", key="physics.grad_variant"
            )
        if not (math.isfinite(self.padding) and self.padding >= 1.0):
            raise ConfigError("padding must be >= 1", key="physics.padding")

    def filter_width(self, grid: Grid) -> float:
        """Filter width delta on `grid`."""
        return self.delta if self.delta is not None else grid.dx

    def eddy_coefficient(self, grid: Grid) -> float:
        """The prefactor (C_S delta)^2."""
        return (self.c_s * self.filter_width(grid)) ** 2


@dataclass(frozen=True)
class ForcingMode:
    """One steady forcing mode amplitude * sin(k . x) * e, with e = (k2, -k1)/|k|.

    The direction e is perpendicular to k, so every mode is divergence-free;
    k = (0, 1) with amplitude 1 is the field (sin y, 0).
    """

    k: tuple[int, int]
    amplitude: float

    def __post_init__(self):
        """Validate the wavevector."""
        if tuple(self.k) == (0, 0):
            raise ConfigError("forcing wavevector must be nonzero", key="forcing.k")
        object.__setattr__(self, "k", (int(self.k[0]), int(self.k[1])))


@dataclass(frozen=True)
class ForcingSpec:
    """Deterministic, time-independent body force."""

    kind: ForcingKind = "zero"
    modes: tuple[ForcingMode, ...] = field(default_factory=tuple)

    def __post_init__(self):
        """Check that the kind and the mode list agree."""
        object.__setattr__(self, "modes", tuple(self.modes))
        if self.kind == "zero" and self.modes:
            raise ConfigError("zero forcing takes no modes", key="forcing.kind")
        if self.kind == "steady-mode" and len(self.modes) != 1:
            raise ConfigError("steady-mode forcing takes exactly one mode", key="forcing.kind")
        if self.kind == "steady-multi-mode" and not self.modes:
            raise ConfigError("steady-multi-mode forcing needs modes", key="forcing.modes")
        if self.kind not in ("zero", "steady-mode", "steady-multi-mode"):
            raise ConfigError(f"unknown forcing kind {self.kind!r}", key="forcing.kind")

    @classmethod
    def single_mode(cls, k: tuple[int, int], amplitude: float) -> "ForcingSpec":
        """Return steady forcing by a single mode."""
        return cls("steady-mode", (ForcingMode(k, amplitude),))

    @property
    def is_zero(self) -> bool:
        """Whether the force vanishes identically."""
        return all(m.amplitude == 0 for m in self.modes)

    def coefficients(self, grid: Grid) -> SpectralVelocity:
        """Fourier coefficients of the force on `grid`."""
        return SpectralVelocity(grid, _forcing_coeffs(self, grid))


@functools.lru_cache(maxsize=32)
def _forcing_coeffs(spec: ForcingSpec, grid: Grid) -> np.ndarray:
    c = np.zeros((grid.d, *grid.shape), dtype=complex)
    for mode in spec.modes:
        k1, k2 = mode.k
        if not (3 * abs(k1) < grid.N and 3 * abs(k2) < grid.N):
            raise ConfigError(
                f"forcing wavevector {mode.k} lies outside the resolved band of N={grid.N}",
                key="forcing.k",
            )
        e = np.array([k2, -k1], dtype=float) / math.hypot(k1, k2)
        # sin(theta) = (e^{i theta} - e^{-i theta}) / 2i
        c[:, k1 % grid.N, k2 % grid.N] += -0.5j * mode.amplitude * e
        c[:, -k1 % grid.N, -k2 % grid.N] += 0.5j * mode.amplitude * e
    c.setflags(write=False)
    return c


def _eval_grid(u: SpectralField, p: SmagorinskyParams) -> Grid:
    return u.grid.padded(p.padding)


def _padded_gradient(u: SpectralField, grid: Grid) -> np.ndarray:
    """Velocity gradient G[i, j] sampled on the (finer) evaluation grid."""
    coeffs = _resample(u.coeffs, u.grid.N, grid.N)
    return np.fft.ifft2(_gradient_coeffs(coeffs, grid), axes=(-2, -1), norm="forward").real


def gradient_magnitude(G: np.ndarray, variant: GradVariant = "frobenius") -> np.ndarray:
    """Pointwise |grad u|: Frobenius norm, or sqrt(2 S:S) for the strain-rate reading."""
    if variant == "frobenius":
        return _magnitude(G)
    S = 0.5 * (G + np.swapaxes(G, 0, 1))
    return np.sqrt(2.0 * np.sum(S**2, axis=(0, 1)))


def advection_term(u: SpectralVelocity) -> SpectralField:
    """Dealiased advective contribution -(u . grad)u to the right-hand side.

    Uses the 2/3 rule: the input is truncated to the dealias mask, the product
    is formed at the collocation points, and the result is truncated again. The
    result is not projected.

    Args:
        u (SpectralVelocity): velocity.

    Returns:
        SpectralField: coefficients of -(u . grad)u.

    """
    grid = u.grid
    mask = grid.dealias_mask
    uc = u.coeffs * mask
    if not np.any(uc):
        return SpectralField(grid, np.zeros_like(uc))
    vel = np.fft.ifft2(uc, axes=(-2, -1), norm="forward").real
    G = np.fft.ifft2(_gradient_coeffs(uc, grid), axes=(-2, -1), norm="forward").real
    adv = np.einsum("jxy,ijxy->ixy", vel, G)
    out = np.fft.fft2(adv, axes=(-2, -1), norm="forward") * mask
    return SpectralField(grid, -out)


def eddy_viscosity_term(u: SpectralVelocity, p: SmagorinskyParams) -> SpectralField:
    """Smagorinsky contribution div((C_S delta)^2 |grad u| grad u).

    The stress is evaluated on a zero-padded grid (factor `p.padding`) and the
    divergence is truncated back to the grid of `u`. |grad u| is not smooth, so
    some aliasing remains by construction.

    Args:
        u (SpectralVelocity): velocity.
        p (SmagorinskyParams): model parameters.

    Returns:
        SpectralField: coefficients of the eddy-viscosity term.

    """
    grid = u.grid
    coef = p.eddy_coefficient(grid)
    if coef == 0.0 or not np.any(u.coeffs):
        return SpectralField(grid, np.zeros_like(u.coeffs))
    fine = _eval_grid(u, p)
    G = _padded_gradient(u, fine)
    T = coef * gradient_magnitude(G, p.grad_variant) * G
    T_hat = _resample(np.fft.fft2(T, axes=(-2, -1), norm="forward"), fine.N, grid.N)
    div = np.sum(1j * grid.derivative_wavenumbers * T_hat, axis=1)
    div[:, grid.nyquist_mask] = 0.0
    return SpectralField(grid, div)


def assemble_rhs(u: SpectralVelocity, f: ForcingSpec, p: SmagorinskyParams) -> SpectralVelocity:
    """Every term of the momentum equation except viscosity, projected.

    Returns P[-(u . grad)u + div((C_S delta)^2 |grad u| grad u) + f], truncated
    to the Galerkin (dealias) band.

    Args:
        u (SpectralVelocity): velocity.
        f (ForcingSpec): body force.
        p (SmagorinskyParams): model parameters.

    Returns:
        SpectralVelocity: divergence-free, mean-zero right-hand side.

    """
    grid = u.grid
    total = advection_term(u).coeffs + eddy_viscosity_term(u, p).coeffs
    if not f.is_zero:
        total = total + f.coefficients(grid).coeffs
    return leray_project(SpectralField(grid, total * grid.dealias_mask))


def dissipation_functionals(u: SpectralVelocity, p: SmagorinskyParams) -> tuple[float, float]:
    """Viscous and Smagorinsky dissipation rates.

    Returns (nu ||grad u||^2_{L^2}, (C_S delta)^2 ||grad u||^3_{L^3}). The viscous
    part is summed spectrally. The Smagorinsky part is integrated on the same
    padded grid the stress is evaluated on, so it equals -(eddy term, u) to
    rounding. With the strain-rate reading the integrand is |grad u|_S |grad u|^2.

    Args:
        u (SpectralVelocity): velocity.
        p (SmagorinskyParams): model parameters.

    Returns:
        tuple[float, float]: the two nonnegative rates.

    """
    grid = u.grid
    power = np.sum(np.abs(u.coeffs) ** 2, axis=0)
    visc = p.nu * float(np.sum(grid.k_squared * power * ~grid.nyquist_mask)) * grid.L**grid.d
    coef = p.eddy_coefficient(grid)
    if coef == 0.0 or not np.any(u.coeffs):
        return visc, 0.0
    fine = _eval_grid(u, p)
    G = _padded_gradient(u, fine)
    integrand = gradient_magnitude(G, p.grad_variant) * np.sum(G**2, axis=(0, 1))
    smag = coef * float(np.sum(integrand)) * fine.dx**fine.d
    return visc, smag


def recover_pressure(u: SpectralVelocity, f: ForcingSpec, p: SmagorinskyParams) -> RealField:
    """Diagnostic pressure solving Lap(p) = div(R) for the unprojected right-hand side R.

    The pressure never enters the dynamics; it is the gradient part removed by
    the projection. Its mean is zero.
    """
    grid = u.grid
    total = advection_term(u).coeffs + eddy_viscosity_term(u, p).coeffs
    if not f.is_zero:
        total = total + f.coefficients(grid).coeffs
    k = grid.wavenumbers
    k2 = grid.k_squared.copy()
    k2[0, 0] = 1.0
    p_hat = -1j * np.sum(k * total, axis=0) / k2
    p_hat[0, 0] = 0.0
    p_hat[grid.nyquist_mask] = 0.0
    return inverse_transform(SpectralField(grid, p_hat))

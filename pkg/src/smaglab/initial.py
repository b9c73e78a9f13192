"""Initial velocity fields."""

import math
from dataclasses import dataclass

import numpy as np

from .error import ConfigError
from .smagorinsky import ForcingSpec
from .spectral import (
    Grid,
    RealField,
    SpectralField,
    SpectralVelocity,
    forward_transform,
    leray_project,
    restrict,
)
from .types import InitialKind


def zero(grid: Grid) -> SpectralVelocity:
    """Return the zero velocity."""
    return SpectralVelocity.zeros(grid)


def taylor_green(grid: Grid, amplitude: float = 1.0) -> SpectralVelocity:
    """Taylor-Green vortex amplitude * (sin x cos y, -cos x sin y) on the lowest mode.

    With c_s = 0 and no forcing it decays as exp(-2 nu k_min^2 t) exactly.

    Args:
        grid (Grid): target grid.
        amplitude (float, optional): velocity scale. Defaults to 1.0.

    Returns:
        SpectralVelocity: the vortex.

    """
    x, y = grid.points * grid.k_min
    values = amplitude * np.stack([np.sin(x) * np.cos(y), -np.cos(x) * np.sin(y)])
    return leray_project(forward_transform(RealField(grid, values)))


def single_mode(grid: Grid, k: tuple[int, int] = (0, 1), amplitude: float = 1.0) -> SpectralVelocity:
    """Shear mode amplitude * sin(k . x) * e with e perpendicular to k.

    k = (0, 1) gives (sin y, 0). Uses the same mode shape as steady forcing.
    """
    return ForcingSpec.single_mode(k, amplitude).coefficients(grid)


@dataclass(frozen=True)
class RandomICSpec:
    """Random divergence-free field with energy spectrum E(k) ~ k^4 exp(-(k/peak_k)^2).

    `amplitude` is the L^2 norm of the generated field. Equal seeds give
    identical fields.
    """

    peak_k: float = 4.0
    amplitude: float = 1.0
    seed: int = 0

    def __post_init__(self):
        """Validate the spectrum parameters."""
        if not (math.isfinite(self.peak_k) and self.peak_k > 0):
            raise ConfigError("peak_k must be > 0", key="initial.peak_k")
        if not (math.isfinite(self.amplitude) and self.amplitude >= 0):
            raise ConfigError("amplitude must be >= 0", key="initial.amplitude")


def random_spectrum(grid: Grid, spec: RandomICSpec) -> SpectralVelocity:
    """Draw a random velocity from `spec`.

    White noise is shaped so that the shell energy follows the target spectrum,
    truncated to the resolved band, projected and normalized.

    Args:
        grid (Grid): target grid.
        spec (RandomICSpec): spectrum, amplitude and seed.

    Returns:
        SpectralVelocity: divergence-free, mean-zero field with L^2 norm `spec.amplitude`.

    Examples:
        >>> from smaglab.initial import RandomICSpec, random_spectrum
        >>> from smaglab.spectral import Grid, l2_inner
        >>> u = random_spectrum(Grid(16), RandomICSpec(peak_k=3.0, amplitude=2.0, seed=1))
        >>> round(l2_inner(u, u) ** 0.5, 10)
        2.0

    """
    rng = np.random.default_rng(spec.seed)
    noise = rng.standard_normal((grid.d, *grid.shape))
    c = forward_transform(RealField(grid, noise)).coeffs

    k = np.sqrt(grid.k_squared)
    k_safe = np.where(k > 0, k, 1.0)
    # per-mode amplitude^2 ~ E(|k|) / |k| in two dimensions
    shell = k_safe**4 * np.exp(-((k_safe / spec.peak_k) ** 2)) / k_safe
    weight = np.where(k > 0, np.sqrt(shell), 0.0) * grid.dealias_mask
    u = leray_project(SpectralField(grid, c * weight))
    return _normalized(u, spec.amplitude)


def _normalized(u: SpectralVelocity, amplitude: float) -> SpectralVelocity:
    grid = u.grid
    norm = math.sqrt(float(np.sum(np.abs(u.coeffs) ** 2)) * grid.L**grid.d)
    if norm == 0.0:
        return u
    return SpectralVelocity(grid, u.coeffs * (amplitude / norm))


def restricted(u: SpectralVelocity, grid: Grid) -> SpectralVelocity:
    """Restrict a velocity to a coarser grid and truncate it to that grid's band."""
    coarse = restrict(u, grid)
    return leray_project(SpectralField(grid, coarse.coeffs * grid.dealias_mask))


@dataclass(frozen=True)
class InitialSpec:
    """Initial condition selector.

    `amplitude` scales Taylor-Green and single-mode data and is the L^2 norm
    of random-spectrum data; `k` is the single-mode wavevector.
    """

    kind: InitialKind = "taylor-green"
    amplitude: float = 1.0
    k: tuple[int, int] = (0, 1)
    peak_k: float = 4.0
    seed: int = 0

    def __post_init__(self):
        """Validate the selector."""
        if self.kind not in ("zero", "taylor-green", "single-mode", "random-spectrum"):
            raise ConfigError(f"unknown initial condition {self.kind!r}", key="initial.kind")
        if self.kind == "random-spectrum":
            self.random_spec()
        elif not math.isfinite(self.amplitude):
            raise ConfigError("amplitude must be finite", key="initial.amplitude")

    def random_spec(self) -> RandomICSpec:
        """The random-spectrum parameters of this selector."""
        return RandomICSpec(peak_k=self.peak_k, amplitude=self.amplitude, seed=self.seed)

    def build(self, grid: Grid) -> SpectralVelocity:
        """Generate the initial velocity on `grid`."""
        if self.kind == "zero":
            return zero(grid)
        if self.kind == "taylor-green":
            return taylor_green(grid, self.amplitude)
        if self.kind == "single-mode":
            return single_mode(grid, self.k, self.amplitude)
        return random_spectrum(grid, self.random_spec())

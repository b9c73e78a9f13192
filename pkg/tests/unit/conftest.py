import pytest

from smaglab.initial import RandomICSpec, random_spectrum, single_mode, taylor_green
from smaglab.spectral import Grid, SpectralVelocity


@pytest.fixture
def grid() -> Grid:
    return Grid(16)


@pytest.fixture
def fine_grid() -> Grid:
    return Grid(32)


@pytest.fixture
def shear(grid: Grid) -> SpectralVelocity:
    # (sin y, 0)
    return single_mode(grid, (0, 1), 1.0)


@pytest.fixture
def vortex(grid: Grid) -> SpectralVelocity:
    return taylor_green(grid)


@pytest.fixture
def turbulent(grid: Grid) -> SpectralVelocity:
    return random_spectrum(grid, RandomICSpec(peak_k=3.0, amplitude=1.0, seed=7))

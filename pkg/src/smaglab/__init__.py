"""Spectral Smagorinsky Navier-Stokes solver with energy-ledger verification."""

try:
    from ._version import version

    __version__ = version
except ImportError:
    __version__ = "0.0.0"

from .config import ExperimentConfig, RunConfig, SimParams, parse_config  # noqa: F401
from .error import BlowUpError, ConfigError, SmaglabError, UsageError  # noqa: F401
from .initial import InitialSpec, RandomICSpec  # noqa: F401
from .integrator import SchemeConfig, SimState, TrajectoryIterator, integrate  # noqa: F401
from .ledger import EnergyRecord, VerificationReport  # noqa: F401
from .smagorinsky import ForcingSpec, SmagorinskyParams  # noqa: F401
from .spectral import Grid, SpectralVelocity  # noqa: F401

"""Verification studies built on repeated simulations."""

from smaglab.config import ExperimentConfig
from smaglab.error import UsageError
from smaglab.ledger import VerificationReport
from smaglab.utils import StrPath

from .base import BaseStudy, RunResult, simulate, solution_difference
from .convergence import ConvergenceStudy
from .regularity import RegularityTrack
from .stability import StabilityCheck
from .sweep import ViscositySweep
from .uniqueness import UniquenessCheck

STUDIES: dict[str, type[BaseStudy]] = {
    "convergence": ConvergenceStudy,
    "uniqueness": UniquenessCheck,
    "sweep": ViscositySweep,
    "regularity": RegularityTrack,
    "stability": StabilityCheck,
}


def convergence_study(cfg: ExperimentConfig, output_dir: StrPath | None = None) -> VerificationReport:
    """Compare solutions at consecutive resolutions; see `ConvergenceStudy`."""
    return ConvergenceStudy(cfg, output_dir).run()


def uniqueness_check(cfg: ExperimentConfig, output_dir: StrPath | None = None) -> VerificationReport:
    """Compare solutions at decreasing time steps; see `UniquenessCheck`."""
    return UniquenessCheck(cfg, output_dir).run()


def viscosity_sweep(cfg: ExperimentConfig, output_dir: StrPath | None = None) -> VerificationReport:
    """Run the forced problem over `nu_list`; see `ViscositySweep`."""
    return ViscositySweep(cfg, output_dir).run()


def regularity_track(cfg: ExperimentConfig, output_dir: StrPath | None = None) -> VerificationReport:
    """Track H^s norms against a Gronwall envelope; see `RegularityTrack`."""
    return RegularityTrack(cfg, output_dir).run()


def stability_check(cfg: ExperimentConfig, output_dir: StrPath | None = None) -> VerificationReport:
    """Track the difference of two nearby solutions; see `StabilityCheck`."""
    return StabilityCheck(cfg, output_dir).run()


def run_experiment(cfg: ExperimentConfig, output_dir: StrPath | None = None) -> VerificationReport:
    """Run the study selected by `cfg.kind`."""
    if cfg.kind not in STUDIES:
        raise UsageError(f"no study selected (experiment.kind = {cfg.kind})")
    return STUDIES[cfg.kind](cfg, output_dir).run()


__all__ = [
    "BaseStudy",
    "ConvergenceStudy",
    "RegularityTrack",
    "RunResult",
    "StabilityCheck",
    "UniquenessCheck",
    "ViscositySweep",
    "convergence_study",
    "regularity_track",
    "run_experiment",
    "simulate",
    "solution_difference",
    "stability_check",
    "uniqueness_check",
    "viscosity_sweep",
]

"""Shared machinery of the studies."""

import dataclasses
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, ClassVar

from smaglab.config import ExperimentConfig, RunConfig, SimParams, dump_config
from smaglab.error import BlowUpError, UsageError
from smaglab.integrator import SimState, integrate
from smaglab.ledger import EnergyRecord, VerificationReport
from smaglab.output import CONFIG_FILENAME, write_csv, write_report
from smaglab.spectral import Grid, SpectralVelocity, l2_inner
from smaglab.utils import StrPath, atomic_write

logger = logging.getLogger("smaglab")

STUDY_HORIZONS: dict[str, float] = {
    "convergence": 1.0,
    "uniqueness": 1.0,
    "sweep": 50.0,
    "regularity": 5.0,
    "stability": 1.0,
}


@dataclass
class RunResult:
    """Outcome of one simulation inside a study.

    `state` is None when the run blew up; `series` then holds the records up
    to the failure. `samples` holds the state at every recorded step when the
    study asked for it.
    """

    key: str
    params: SimParams
    state: SimState | None
    series: list[EnergyRecord]
    error: str | None = None
    samples: list[SimState] = field(default_factory=list)

    @property
    def blew_up(self) -> bool:
        """Whether the run stopped at a non-finite state."""
        return self.error is not None


def simulate(
    key: str,
    params: SimParams,
    u0: SpectralVelocity,
    *,
    s_list: tuple[float, ...] = (),
    record_every: int = 1,
    keep_states: bool = False,
) -> RunResult:
    """Run one simulation, turning a blow-up into a flagged result."""
    samples: list[SimState] = [SimState(0.0, u0)] if keep_states else []

    def keep(state: SimState, rec: EnergyRecord | None) -> None:
        if rec is not None:
            samples.append(state)

    logger.info(f"Run {key}: N={params.grid.N} nu={params.physics.nu} t_end={params.scheme.t_end}")
    try:
        state, series = integrate(
            u0,
            params.forcing,
            params.physics,
            params.scheme,
            [keep] if keep_states else [],
            s_list=s_list,
            record_every=record_every,
        )
    except BlowUpError as exc:
        logger.warning(f"Run {key} blew up: {exc}")
        return RunResult(key, params, None, list(exc.series), str(exc), samples)
    return RunResult(key, params, state, series, samples=samples)


def solution_difference(
    a: SimState | SpectralVelocity,
    b: SimState | SpectralVelocity,
) -> float:
    """L^2 norm of the difference of two solutions on the same grid.

    Args:
        a (SimState | SpectralVelocity): first solution.
        b (SimState | SpectralVelocity): second solution.

    Returns:
        float: ||a - b||_{L^2}.

    """
    ua = a.u if isinstance(a, SimState) else a
    ub = b.u if isinstance(b, SimState) else b
    if ua.grid != ub.grid:
        raise UsageError(f"cannot compare solutions on different grids: N={ua.grid.N} vs N={ub.grid.N}")
    diff = SpectralVelocity(ua.grid, ua.coeffs - ub.coeffs)
    return math.sqrt(max(l2_inner(diff, diff), 0.0))


def write_run_dir(
    directory: StrPath,
    cfg: ExperimentConfig,
    reports: VerificationReport | list[VerificationReport],
    results: list[RunResult],
) -> None:
    """Write a study's run directory.

    Contents: the config snapshot, one CSV series per run under `series/`
    and the report as text and JSON.
    """
    os.makedirs(directory, exist_ok=True)
    snapshot = RunConfig(cfg, output_dir=os.fspath(directory))
    atomic_write(os.path.join(directory, CONFIG_FILENAME), dump_config(snapshot))
    for result in results:
        path = os.path.join(directory, "series", f"{result.key}.csv")
        write_csv(result.series, path, s_list=cfg.s_track)
    write_report(reports, directory)


class BaseStudy:
    """Base class of the studies: parameter plumbing, run scheduling and output."""

    name: ClassVar[str]

    def __init__(self, cfg: ExperimentConfig, output_dir: StrPath | None = None):
        """Initialize the study.

        Args:
            cfg (ExperimentConfig): study configuration.
            output_dir (StrPath | None, optional): run directory to write; nothing is written when None. Defaults to None.

        """
        self._cfg = cfg
        self._output_dir = output_dir

    @property
    def t_end(self) -> float:
        """Horizon of every run in the study."""
        if self._cfg.t_end is not None:
            return self._cfg.t_end
        return STUDY_HORIZONS[self.name]

    def _params(self, **changes: Any) -> SimParams:
        base = self._cfg.base
        scheme = dataclasses.replace(changes.pop("scheme", base.scheme), t_end=self.t_end)
        return dataclasses.replace(base, scheme=scheme, **changes)

    def _initial(self, grid: Grid) -> SpectralVelocity:
        return self._cfg.initial_spec().build(grid)

    def _run_all(
        self,
        jobs: list[tuple[str, SimParams, SpectralVelocity]],
        keep_states: bool = False,
    ) -> list[RunResult]:
        """Run every job; results come back in job order."""

        def run(job: tuple[str, SimParams, SpectralVelocity]) -> RunResult:
            key, params, u0 = job
            return simulate(
                key,
                params,
                u0,
                s_list=self._cfg.s_track,
                record_every=self._cfg.record_every,
                keep_states=keep_states,
            )

        workers = min(self._cfg.max_workers, len(jobs))
        if workers <= 1:
            return [run(job) for job in jobs]
        with ThreadPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(run, jobs))

    def _execute(self) -> tuple[VerificationReport, list[RunResult]]:
        raise NotImplementedError()

    def run(self) -> VerificationReport:
        """Run the study and write its run directory.

        Returns:
            VerificationReport: the study report.

        """
        logger.info(f"Starting {self.name} study (t_end={self.t_end})")
        report, results = self._execute()
        if self._output_dir is not None:
            write_run_dir(self._output_dir, self._cfg, report, results)
        logger.info(f"Finished {self.name} study: {report.status}")
        return report

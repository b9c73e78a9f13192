"""Command-line interface.

    smaglab run <config> [--resume CHECKPOINT]
    smaglab sweep <config>
    smaglab verify <run-dir>
    smaglab info

Exit status: 0 pass, 1 I/O failure, 2 verification failure, 3 blow-up,
4 configuration error.
"""

import argparse
import dataclasses
import glob
import logging
import os
import sys
from collections.abc import Sequence

import numpy as np
import scipy

from . import __version__
from .checkpoint import CheckpointObserver, load_checkpoint
from .config import OUTPUT_ROOT, RunConfig, dump_config, load_config, parse_config
from .error import BlowUpError, CheckpointError, ConfigError, UsageError
from .experiments import run_experiment
from .integrator import Observer, SimState, integrate
from .ledger import (
    EnergyRecord,
    VerificationReport,
    verify_energy_identity,
    verify_energy_inequality,
)
from .output import CONFIG_FILENAME, SERIES_FILENAME, read_csv, write_csv, write_report
from .spectral import poincare_constant
from .types import Status
from .utils import atomic_write

logger = logging.getLogger("smaglab")

EXIT_OK = 0
EXIT_IO = 1
EXIT_VERIFICATION = 2
EXIT_BLOW_UP = 3
EXIT_CONFIG = 4

CHECKPOINT_FILENAME = "checkpoint.bin"

_EXIT_BY_STATUS: dict[Status, int] = {
    "pass": EXIT_OK,
    "no-op": EXIT_OK,
    "fail": EXIT_VERIFICATION,
    "inconclusive": EXIT_VERIFICATION,
    "blow-up": EXIT_BLOW_UP,
}


def exit_status(reports: Sequence[VerificationReport]) -> int:
    """Exit status for a set of reports; the most severe outcome wins."""
    codes = [_EXIT_BY_STATUS[r.status or "fail"] for r in reports]
    return max(codes, default=EXIT_OK)


def ledger_checks(
    series: Sequence[EnergyRecord],
    nu: float,
    order: int,
    dt: float | None,
    c_p: float,
    u0_norm_sq: float | None = None,
) -> list[VerificationReport]:
    """Energy identity and energy inequality of one series.

    The inequality starts from the first record unless `u0_norm_sq` is given.
    `dt` is None for CFL-controlled runs, whose step varies.
    """
    if len(series) < 2:
        return [VerificationReport("ledger", True, status="no-op", notes=["fewer than two records"])]
    if u0_norm_sq is None:
        u0_norm_sq = 2.0 * series[0].energy
    return [
        verify_energy_identity(series, dt, order),
        verify_energy_inequality(series, u0_norm_sq, nu, c_p=c_p),
    ]


def _run_name(config_path: str) -> str:
    return os.path.splitext(os.path.basename(config_path))[0]


def run_simulation(cfg: RunConfig, directory: str, resume: str | None = None) -> int:
    """Integrate the configured simulation and write its run directory.

    The directory receives the effective config, `series.csv` and the report.
    When resuming, records of an earlier `series.csv` older than the
    checkpoint are kept in front of the new ones.

    Args:
        cfg (RunConfig): validated configuration.
        directory (str): run directory.
        resume (str | None, optional): checkpoint to continue from. Defaults to None.

    Returns:
        int: exit status.

    """
    sim, exp = cfg.sim, cfg.experiment
    os.makedirs(directory, exist_ok=True)
    atomic_write(os.path.join(directory, CONFIG_FILENAME), dump_config(cfg))
    series_path = os.path.join(directory, SERIES_FILENAME)

    earlier: list[EnergyRecord] = []
    previous: list[EnergyRecord] = []
    if resume is not None:
        initial = load_checkpoint(resume)
        if initial.u.grid != sim.grid:
            raise ConfigError(f"checkpoint grid N={initial.u.grid.N} does not match the configured grid")
        logger.info(f"Resuming from t={initial.t} (step {initial.step_index})")
        if os.path.exists(series_path):
            earlier = read_csv(series_path)
            previous = [r for r in earlier if r.t < initial.t]
    else:
        initial = SimState(0.0, sim.initial.build(sim.grid))

    observers: list[Observer] = []
    if cfg.checkpoint_every > 0:
        path = os.path.join(directory, CHECKPOINT_FILENAME)
        observers.append(CheckpointObserver(path, cfg.checkpoint_every))

    try:
        _, series = integrate(
            initial,
            sim.forcing,
            sim.physics,
            sim.scheme,
            observers,
            s_list=exp.s_track,
            record_every=exp.record_every,
        )
    except BlowUpError as exc:
        write_csv(previous + list(exc.series), series_path, s_list=exp.s_track)
        report = VerificationReport(
            "run",
            False,
            measured={"t": exc.t, "step_index": exc.step_index},
            notes=[str(exc)],
            status="blow-up",
        )
        write_report(report, directory)
        return EXIT_BLOW_UP

    if not series:
        # resumed at t_end: the earlier file already holds the final record
        previous = [r for r in earlier if r.t <= initial.t]
    full = previous + series
    write_csv(full, series_path, s_list=exp.s_track)
    if not full:
        reports = [VerificationReport("run", True, status="no-op", notes=["t_end reached before the first step"])]
    else:
        reports = ledger_checks(
            full,
            sim.physics.nu,
            sim.scheme.order,
            None if sim.scheme.adaptive else sim.scheme.dt,
            poincare_constant(sim.grid),
        )
    write_report(reports, directory)
    return exit_status(reports)


def _series_parameter(name: str, key: str) -> float | None:
    """Value of `key` encoded in a series file name such as `nu=0.01.csv`."""
    stem = os.path.splitext(os.path.basename(name))[0]
    prefix = f"{key}="
    return float(stem[len(prefix) :]) if stem.startswith(prefix) else None


def verify_run_dir(directory: str) -> list[VerificationReport]:
    """Re-run the ledger checks on the series stored in a run directory.

    Args:
        directory (str): directory written by `run` or by a study.

    Returns:
        list[VerificationReport]: one identity and one inequality report per series.

    """
    with open(os.path.join(directory, CONFIG_FILENAME), encoding="utf-8") as f:
        cfg = parse_config(f.read())
    sim = cfg.sim
    single = os.path.join(directory, SERIES_FILENAME)
    paths = [single] if os.path.exists(single) else sorted(glob.glob(os.path.join(directory, "series", "*.csv")))
    if not paths:
        raise ConfigError(f"no series found in {directory}")

    reports = []
    for path in paths:
        series = read_csv(path)
        nu = _series_parameter(path, "nu") or sim.physics.nu
        dt = _series_parameter(path, "dt")
        if dt is None and not sim.scheme.adaptive:
            dt = sim.scheme.dt
        for report in ledger_checks(series, nu, sim.scheme.order, dt, poincare_constant(sim.grid)):
            reports.append(dataclasses.replace(report, name=f"{report.name} [{os.path.basename(path)}]"))
    return reports


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    directory = cfg.resolve_output_dir(_run_name(args.config))
    if cfg.experiment.kind != "none":
        if args.resume:
            raise ConfigError("--resume applies to plain runs only", key="experiment.kind")
        return exit_status([run_experiment(cfg.experiment, directory)])
    return run_simulation(cfg, directory, resume=args.resume)


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    experiment = dataclasses.replace(cfg.experiment, kind="sweep")
    directory = cfg.resolve_output_dir(_run_name(args.config))
    return exit_status([run_experiment(experiment, directory)])


def _cmd_verify(args: argparse.Namespace) -> int:
    reports = verify_run_dir(args.run_dir)
    sys.stdout.write("".join(r.to_text() for r in reports))
    return exit_status(reports)


def _cmd_info(args: argparse.Namespace) -> int:
    lines = [
        f"smaglab {__version__}",
        f"numpy {np.__version__}",
        f"scipy {scipy.__version__}",
        f"python {sys.version.split()[0]}",
        f"output root {OUTPUT_ROOT}",
    ]
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    """Argument parser of the `smaglab` command."""
    parser = argparse.ArgumentParser(
        prog="smaglab",
        description="Spectral Smagorinsky Navier-Stokes solver with energy-ledger verification.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log debug messages")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a simulation or the configured study")
    run.add_argument("config", help="configuration file")
    run.add_argument("--resume", metavar="CHECKPOINT", help="continue from a checkpoint")
    run.set_defaults(func=_cmd_run)

    sweep = sub.add_parser("sweep", help="run the viscosity sweep of a configuration")
    sweep.add_argument("config", help="configuration file")
    sweep.set_defaults(func=_cmd_sweep)

    verify = sub.add_parser("verify", help="re-check the series stored in a run directory")
    verify.add_argument("run_dir", help="run directory")
    verify.set_defaults(func=_cmd_verify)

    info = sub.add_parser("info", help="print version information")
    info.set_defaults(func=_cmd_info)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point of the `smaglab` command.

    Args:
        argv (Sequence[str] | None, optional): arguments without the program name. Defaults to None.

    Returns:
        int: exit status.

    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ConfigError, UsageError, CheckpointError) as exc:
        logger.error(str(exc))
        return EXIT_CONFIG
    except OSError as exc:
        logger.error(f"{exc.filename or ''}: {exc.strerror or exc}")
        return EXIT_IO

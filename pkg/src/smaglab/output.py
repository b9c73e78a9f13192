"""CSV series and verification reports."""

import csv
import io
import json
import logging
import os
from collections.abc import Sequence

from .error import ConfigError
from .ledger import EnergyRecord, VerificationReport
from .utils import StrPath, _format_float, atomic_write

logger = logging.getLogger("smaglab")

CSV_FIELDS = ("t", "energy", "visc_diss", "smag_diss", "power_in", "hminus1_f")
SERIES_FILENAME = "series.csv"
REPORT_TEXT_FILENAME = "report.txt"
REPORT_JSON_FILENAME = "report.json"
CONFIG_FILENAME = "config.txt"


def hs_column(s: float) -> str:
    """Column name of the H^s norm, e.g. `hs_2` or `hs_1.5`."""
    return f"hs_{float(s):g}"


def write_csv(
    series: Sequence[EnergyRecord],
    path: StrPath,
    s_list: Sequence[float] | None = None,
) -> None:
    """Write an energy series as CSV.

    Floats are written as the shortest decimal that parses back to the same
    double. The file is replaced atomically.

    Args:
        series (Sequence[EnergyRecord]): records to write, possibly empty.
        path (StrPath): destination file.
        s_list (Sequence[float] | None, optional): Sobolev columns; taken from the first record when None. Defaults to None.

    """
    if s_list is None:
        s_list = list(series[0].hs) if series else []
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([*CSV_FIELDS, *(hs_column(s) for s in s_list)])
    for r in series:
        row = [r.t, r.energy, r.visc_diss, r.smag_diss, r.power_in, r.hminus1_f]
        row += [r.hs[float(s)] for s in s_list]
        writer.writerow([_format_float(v) for v in row])
    atomic_write(path, buf.getvalue())


def read_csv(path: StrPath) -> list[EnergyRecord]:
    """Read an energy series written by `write_csv`.

    Args:
        path (StrPath): CSV file.

    Returns:
        list[EnergyRecord]: the records, bit-identical to the written values.

    """
    with open(path, encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise ConfigError(f"{os.fspath(path)}: empty series file")
    header = rows[0]
    if tuple(header[: len(CSV_FIELDS)]) != CSV_FIELDS:
        raise ConfigError(f"{os.fspath(path)}: unexpected header {header}")
    extra = header[len(CSV_FIELDS) :]
    if any(not name.startswith("hs_") for name in extra):
        raise ConfigError(f"{os.fspath(path)}: unexpected columns {extra}")
    orders = [float(name[3:]) for name in extra]

    series = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ConfigError(f"{os.fspath(path)}: wrong number of fields", line=lineno)
        try:
            values = [float(v) for v in row]
        except ValueError as exc:
            raise ConfigError(f"{os.fspath(path)}: {exc}", line=lineno) from exc
        base = values[: len(CSV_FIELDS)]
        hs = dict(zip(orders, values[len(CSV_FIELDS) :], strict=True))
        series.append(EnergyRecord(*base, hs=hs))
    return series


def write_report(
    reports: VerificationReport | Sequence[VerificationReport],
    directory: StrPath,
) -> None:
    """Write reports as `report.txt` and `report.json` in `directory`."""
    if isinstance(reports, VerificationReport):
        reports = [reports]
    text = "".join(r.to_text() for r in reports)
    record = [r.to_dict() for r in reports]
    atomic_write(os.path.join(directory, REPORT_TEXT_FILENAME), text)
    atomic_write(
        os.path.join(directory, REPORT_JSON_FILENAME),
        json.dumps(record, indent=2, allow_nan=True) + "\n",
    )
    logger.info(f"Wrote report to {os.fspath(directory)}")


def read_report(directory: StrPath) -> list[dict]:
    """Read the machine-readable report of a run directory."""
    with open(os.path.join(directory, REPORT_JSON_FILENAME), encoding="utf-8") as f:
        return json.load(f)

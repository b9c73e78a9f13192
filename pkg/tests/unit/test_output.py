import json
import math
import os

import pytest

from smaglab.error import ConfigError
from smaglab.integrator import SchemeConfig, integrate
from smaglab.ledger import EnergyRecord, VerificationReport
from smaglab.output import hs_column, read_csv, read_report, write_csv, write_report
from smaglab.smagorinsky import ForcingSpec, SmagorinskyParams
from smaglab.spectral import SpectralVelocity

HEADER = "t,energy,visc_diss,smag_diss,power_in,hminus1_f\n"


def test_hs_column():
    assert hs_column(2) == "hs_2"
    assert hs_column(1.5) == "hs_1.5"
    assert hs_column(-1.0) == "hs_-1"


def test_empty_series_has_only_a_header(tmp_path):
    path = tmp_path / "series.csv"
    write_csv([], path)
    assert path.read_text(encoding="utf-8") == HEADER
    assert read_csv(path) == []


def test_series_reads_back_bit_exactly(tmp_path, turbulent: SpectralVelocity):
    p = SmagorinskyParams(nu=0.01, c_s=0.17)
    f = ForcingSpec.single_mode((1, 2), 0.3)
    _, series = integrate(turbulent, f, p, SchemeConfig(t_end=0.05, dt=0.01), s_list=(2.0, 0.5))
    path = tmp_path / "series.csv"
    write_csv(series, path)

    header = path.read_text(encoding="utf-8").splitlines()[0]
    assert header == HEADER.strip() + ",hs_2,hs_0.5"
    assert read_csv(path) == series


def test_tiny_values_survive(tmp_path):
    rec = EnergyRecord(0.1, 5e-324, 1.0 / 3.0, 0.0, -2.5e-17, math.pi, {2.0: 1e300})
    path = tmp_path / "series.csv"
    write_csv([rec], path)
    assert read_csv(path) == [rec]


def test_no_temporary_files_are_left(tmp_path):
    write_csv([EnergyRecord(0.0, 1.0, 0.0, 0.0, 0.0, 0.0)], tmp_path / "series.csv")
    write_csv([], tmp_path / "series.csv")
    assert os.listdir(tmp_path) == ["series.csv"]


def test_write_creates_directories(tmp_path):
    path = tmp_path / "a" / "b" / "series.csv"
    write_csv([], path)
    assert path.exists()


@pytest.mark.parametrize(
    "text, line",
    [
        ("", None),
        ("time,energy\n", None),
        (HEADER + "0.0,1.0\n", 2),
        (HEADER + "0.0,1.0,0.0,0.0,0.0,zero\n", 2),
        (HEADER.strip() + ",norm\n", None),
    ],
)
def test_malformed_series(tmp_path, text: str, line: int | None):
    path = tmp_path / "series.csv"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(ConfigError) as exc:
        read_csv(path)
    assert exc.value.line == line


def test_reports(tmp_path):
    reports = [
        VerificationReport(
            "energy-identity",
            True,
            tolerance=1e-6,
            measured={"max_relative_residual": 1.5e-9, "residuals": list(range(20))},
            flags={"rounding_level": False},
        ),
        VerificationReport("energy-inequality", False, notes=["violated at t=0.3"]),
    ]
    write_report(reports, tmp_path)

    text = (tmp_path / "report.txt").read_text(encoding="utf-8")
    assert "[energy-identity] PASS" in text
    assert "max_relative_residual: 1.5e-09" in text
    assert "residuals: <20 values>" in text
    assert "[energy-inequality] FAIL" in text
    assert "note: violated at t=0.3" in text

    loaded = read_report(tmp_path)
    assert [r["name"] for r in loaded] == ["energy-identity", "energy-inequality"]
    assert loaded[0]["status"] == "pass"
    assert loaded[0]["measured"]["residuals"] == list(range(20))
    assert loaded == json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))


def test_single_report(tmp_path):
    write_report(VerificationReport("stability", True, status="inconclusive"), tmp_path)
    assert read_report(tmp_path)[0]["status"] == "inconclusive"

"""Viscosity sweep: long-time bound and dissipation as nu decreases."""

import dataclasses
from typing import Any

import numpy as np
from scipy.integrate import trapezoid

from smaglab.error import UsageError
from smaglab.ledger import VerificationReport, asymptotic_bound_check
from smaglab.spectral import poincare_constant

from .base import BaseStudy, RunResult


def _time_integral(result: RunResult, name: str) -> float:
    t = np.array([r.t for r in result.series])
    y = np.array([getattr(r, name) for r in result.series])
    return float(trapezoid(y, t)) if len(t) > 1 else 0.0


class ViscositySweep(BaseStudy):
    """Run the forced problem for every nu in `nu_list`.

    Per nu the report carries C_meas and the stationarity of the tail, and
    the total dissipations D_smag = int (C_S delta)^2 ||grad u||^3 and
    D_visc = int nu ||grad u||^2. The anomaly indicator is
    D_smag(nu_min) / D_smag(nu_max). A run that blows up is flagged and the
    sweep goes on.
    """

    name = "sweep"

    def _execute(self) -> tuple[VerificationReport, list[RunResult]]:
        cfg = self._cfg
        base = cfg.base
        if not cfg.nu_list:
            raise UsageError("viscosity sweep needs a nonempty nu_list")
        if base.forcing.is_zero:
            raise UsageError("viscosity sweep needs nonzero forcing")
        if base.physics.c_s == 0:
            raise UsageError("viscosity sweep needs c_s > 0")

        u0 = self._initial(base.grid)
        jobs = [
            (f"nu={nu!r}", self._params(physics=dataclasses.replace(base.physics, nu=nu)), u0)
            for nu in cfg.nu_list
        ]
        results = self._run_all(jobs)
        c_p = poincare_constant(base.grid)

        runs: list[dict[str, Any]] = []
        all_ok = True
        for nu, result in zip(cfg.nu_list, results, strict=True):
            entry: dict[str, Any] = {"nu": nu, "blow_up": result.blew_up}
            if result.blew_up:
                entry["error"] = result.error
                all_ok = False
            else:
                bound = asymptotic_bound_check(
                    result.series, nu, base.forcing, c_p=c_p, tail_fraction=cfg.tail_fraction
                )
                entry.update(
                    c_meas=bound.measured["c_meas"],
                    limsup_norm_sq=bound.measured["limsup_norm_sq"],
                    tail_drift=bound.measured["tail_drift"],
                    bounded=bound.flags["bounded"],
                    non_stationary=bound.flags["non_stationary"],
                    d_smag=_time_integral(result, "smag_diss"),
                    d_visc=_time_integral(result, "visc_diss"),
                )
                all_ok = all_ok and bound.passed
            runs.append(entry)

        first, last = runs[0], runs[-1]
        indicator = None
        if len(runs) == 1:
            indicator = 1.0
        elif not first["blow_up"] and not last["blow_up"] and first["d_smag"] > 0:
            indicator = last["d_smag"] / first["d_smag"]

        blown = any(r["blow_up"] for r in runs)
        anomalous = indicator is not None and indicator >= cfg.anomaly_threshold
        report = VerificationReport(
            "sweep",
            all_ok and anomalous,
            cfg.anomaly_threshold,
            measured={
                "t_end": self.t_end,
                "poincare_constant": c_p,
                "nominal_constant": 2.0 * c_p**2,
                "runs": runs,
                "anomaly_indicator": indicator,
            },
            flags={"blow_up": blown, "dissipation_persists": anomalous},
            status="blow-up" if blown else None,
        )
        return report, results

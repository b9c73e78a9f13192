"""Continuous dependence on the initial data."""

import math

import numpy as np

from smaglab.initial import RandomICSpec, random_spectrum
from smaglab.ledger import VerificationReport, gronwall_bound
from smaglab.spectral import SpectralVelocity

from .base import BaseStudy, RunResult, solution_difference


class StabilityCheck(BaseStudy):
    """Track ||u(t) - v(t)||^2 for two runs whose initial data differ slightly.

    The second run starts from u0 + w with w a random divergence-free field of
    L^2 norm `perturbation`. The smallest rate beta with
    ||u - v||^2(t) <= ||u - v||^2(0) exp(beta t) is fitted, and the resulting
    Gronwall envelope is checked to dominate the measured differences.
    """

    name = "stability"

    def _execute(self) -> tuple[VerificationReport, list[RunResult]]:
        cfg = self._cfg
        grid = cfg.base.grid
        spec = cfg.initial_spec()
        u0 = self._initial(grid)
        w = random_spectrum(
            grid, RandomICSpec(peak_k=spec.peak_k, amplitude=cfg.perturbation, seed=spec.seed + 1)
        )
        v0 = SpectralVelocity(grid, u0.coeffs + w.coeffs)
        params = self._params()
        results = self._run_all([("reference", params, u0), ("perturbed", params, v0)], keep_states=True)
        ref, pert = results

        if ref.blew_up or pert.blew_up:
            report = VerificationReport(
                "stability",
                False,
                measured={"perturbation": cfg.perturbation},
                notes=["a run blew up"],
                status="blow-up",
            )
            return report, results

        t = np.array([s.t for s in ref.samples])
        d2 = np.array([solution_difference(a, b) ** 2 for a, b in zip(ref.samples, pert.samples, strict=True)])
        rate = 0.0
        for i in range(len(t) - 1):
            if d2[i] > 0 and d2[i + 1] > 0:
                rate = max(rate, math.log(d2[i + 1] / d2[i]) / (t[i + 1] - t[i]))
        env = gronwall_bound(t, d2[0], rate)
        finite = bool(np.all(np.isfinite(d2)))
        dominated = env.dominates(d2)

        report = VerificationReport(
            "stability",
            finite and dominated,
            measured={
                "t_end": self.t_end,
                "perturbation": cfg.perturbation,
                "growth_rate": rate,
                "initial_difference_sq": float(d2[0]),
                "final_difference_sq": float(d2[-1]),
                "max_difference_sq": float(np.max(d2)),
            },
            flags={"finite": finite, "envelope_dominates": dominated},
        )
        return report, results

"""H^s regularity tracking against a fitted Gronwall envelope."""

import math
from typing import Any

import numpy as np

from smaglab.error import UsageError
from smaglab.ledger import VerificationReport, gronwall_bound
from smaglab.spectral import sobolev_norm

from .base import BaseStudy, RunResult


def fit_growth_rate(t: np.ndarray, y: np.ndarray, a: np.ndarray) -> float:
    """Smallest C1 >= 0 with y(t) <= a(t) exp(C1 t) at every sample."""
    rate = 0.0
    for ti, yi, ai in zip(t, y, a, strict=True):
        if ti > 0 and yi > 0 and ai > 0:
            rate = max(rate, math.log(yi / ai) / ti)
    return rate


class RegularityTrack(BaseStudy):
    """Follow ||u(t)||^2_{H^s} for every tracked s > 1.

    The envelope (||u0||^2_{H^s} + t ||f||^2_{H^(s-2)}) exp(C1 t) is fitted with
    the smallest feasible C1 and checked to dominate the trajectory. The
    constant C of ||u(t)||^2_{H^s} <= C (||u0||^2_{H^s} + ||f||^2_{H^(s-2)}) over
    [0, T] is reported too.
    """

    name = "regularity"

    def _execute(self) -> tuple[VerificationReport, list[RunResult]]:
        cfg = self._cfg
        if not cfg.s_track:
            raise UsageError("regularity tracking needs at least one order in s_track")
        low = [s for s in cfg.s_track if s <= 1]
        if low:
            raise UsageError(f"regularity tracking needs s > 1, got {low}")

        base = cfg.base
        params = self._params()
        results = self._run_all([("track", params, self._initial(base.grid))])
        (result,) = results
        if not result.series:
            return VerificationReport("regularity", True, status="no-op", notes=["t_end = 0"]), results
        t = np.array([r.t for r in result.series])

        tracks: list[dict[str, Any]] = []
        dominated_all = True
        bounded = not result.blew_up
        f_coeffs = None if base.forcing.is_zero else base.forcing.coefficients(base.grid)
        for s in cfg.s_track:
            y = np.array([r.hs[float(s)] ** 2 for r in result.series])
            f_sq = 0.0 if f_coeffs is None else sobolev_norm(f_coeffs, s - 2) ** 2
            alpha = y[0] + t * f_sq
            c1 = fit_growth_rate(t, y, alpha)
            env = gronwall_bound(t, alpha, c1)
            dominated = env.dominates(y)
            scale = y[0] + f_sq
            implied = float(np.max(y)) / scale if scale > 0 else 0.0
            finite = bool(np.all(np.isfinite(y)))
            bounded = bounded and finite
            dominated_all = dominated_all and dominated
            tracks.append(
                {
                    "s": s,
                    "c1": c1,
                    "implied_c": implied,
                    "initial_norm_sq": float(y[0]),
                    "max_norm_sq": float(np.max(y)),
                    "final_norm_sq": float(y[-1]),
                    "forcing_norm_sq": f_sq,
                    "envelope_dominates": dominated,
                }
            )

        report = VerificationReport(
            "regularity",
            bounded and dominated_all,
            measured={"t_end": self.t_end, "tracks": tracks},
            flags={"bounded": bounded, "envelope_dominates": dominated_all},
            notes=["run blew up before t_end"] if result.blew_up else [],
            status="blow-up" if result.blew_up else None,
        )
        return report, results

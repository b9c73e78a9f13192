"""Agreement of two time discretizations of the same data."""

import dataclasses
import math

from smaglab.error import UsageError
from smaglab.ledger import ORDER_TOLERANCE, VerificationReport
from smaglab.spectral import l2_inner

from .base import BaseStudy, RunResult, solution_difference

ROUNDOFF = 1e-12


class UniquenessCheck(BaseStudy):
    """Run the same data with the steps in `dt_levels` and compare at t = T.

    Differences d_i = ||u_{dt_i}(T) - u_{dt_(i+1)}(T)|| must shrink at the
    scheme's order. Differences at rounding level (the scheme is exact for the
    data) count as agreement.
    """

    name = "uniqueness"

    def _levels(self) -> tuple[float, ...]:
        levels = self._cfg.dt_levels
        if not levels:
            scheme = self._cfg.base.scheme
            if scheme.adaptive or scheme.dt is None:
                raise UsageError("uniqueness check needs dt_levels or a fixed base step")
            levels = (scheme.dt, scheme.dt / 2, scheme.dt / 4)
        if len(levels) < 2:
            raise UsageError("uniqueness check needs at least two time steps")
        return levels

    def _execute(self) -> tuple[VerificationReport, list[RunResult]]:
        levels = self._levels()
        base = self._cfg.base
        u0 = self._initial(base.grid)
        jobs = [
            (f"dt={dt!r}", self._params(scheme=dataclasses.replace(base.scheme, dt=dt, cfl=None)), u0)
            for dt in levels
        ]
        results = self._run_all(jobs)
        order = base.scheme.order

        if any(r.state is None for r in results):
            report = VerificationReport(
                "uniqueness",
                False,
                ORDER_TOLERANCE,
                measured={"dt_levels": list(levels), "blown_up": [r.key for r in results if r.blew_up]},
                notes=["a run blew up"],
                status="blow-up",
            )
            return report, results

        states = [r.state for r in results if r.state is not None]
        diffs = [solution_difference(a, b) for a, b in zip(states, states[1:], strict=False)]
        orders = [
            math.log(d0 / d1) / math.log(h0 / h1) if d0 > 0 and d1 > 0 else math.nan
            for d0, d1, h0, h1 in zip(diffs, diffs[1:], levels, levels[1:], strict=False)
        ]
        scale = max(math.sqrt(l2_inner(s.u, s.u)) for s in states)
        roundoff = all(d <= ROUNDOFF * max(scale, 1.0) for d in diffs)

        status = None
        notes = []
        if roundoff:
            notes.append("differences at rounding level; the scheme is exact for these data")
            passed = True
        elif orders and math.isfinite(orders[-1]):
            passed = abs(orders[-1] - order) <= ORDER_TOLERANCE
        else:
            notes.append("three time steps are needed to measure the order")
            passed = False
            status = "inconclusive"

        report = VerificationReport(
            "uniqueness",
            passed,
            ORDER_TOLERANCE,
            measured={
                "t_end": self.t_end,
                "scheme_order": order,
                "dt_levels": list(levels),
                "differences": diffs,
                "observed_orders": orders,
            },
            flags={"roundoff": roundoff},
            notes=notes,
            status=status,
        )
        return report, results

"""Refinement convergence of the Galerkin approximations."""

import dataclasses

from smaglab.error import UsageError
from smaglab.initial import restricted
from smaglab.ledger import VerificationReport
from smaglab.spectral import Grid, restrict

from .base import BaseStudy, RunResult, solution_difference

EXACT_TOLERANCE = 1e-8


class ConvergenceStudy(BaseStudy):
    """Compare solutions at consecutive resolutions N < N' at t = T.

    The initial field is drawn on the finest grid and restricted to the
    others, and the filter width is fixed to the spacing of the coarsest grid
    unless configured, so every run approximates the same model problem.
    The error e_N = ||u_N(T) - restrict(u_N'(T))|| should fall with N, and for
    smooth data the ratios e_N / e_N' should grow.
    """

    name = "convergence"

    def _execute(self) -> tuple[VerificationReport, list[RunResult]]:
        cfg = self._cfg
        if len(cfg.resolutions) < 3:
            raise UsageError("convergence study needs at least three resolutions")

        grids = [Grid(n, cfg.base.grid.L) for n in cfg.resolutions]
        physics = cfg.base.physics
        if physics.delta is None:
            physics = dataclasses.replace(physics, delta=grids[0].dx)
        u_fine = self._initial(grids[-1])
        jobs = [
            (f"N={g.N}", self._params(grid=g, physics=physics), restricted(u_fine, g))
            for g in grids
        ]
        results = self._run_all(jobs)

        errors: list[float | None] = []
        for coarse, fine in zip(results, results[1:], strict=False):
            if coarse.state is None or fine.state is None:
                errors.append(None)
                continue
            shared = restrict(fine.state.u, coarse.state.u.grid)
            errors.append(solution_difference(coarse.state, shared))

        known = [e for e in errors if e is not None]
        ratios = [a / b if b > 0 else float("inf") for a, b in zip(known, known[1:], strict=False)]
        inconclusive = len(known) < len(errors)
        exact = bool(known) and all(e <= EXACT_TOLERANCE for e in known)
        decreasing = all(a > b for a, b in zip(known, known[1:], strict=False))
        growing = all(a < b for a, b in zip(ratios, ratios[1:], strict=False))

        notes = []
        if inconclusive:
            notes.append("a run blew up; the pairs involving it are inconclusive")
        if not exact and len(ratios) < 2:
            notes.append("fewer than two ratios; ratio growth not tested")
        passed = not inconclusive and (exact or (decreasing and growing))
        report = VerificationReport(
            "convergence",
            passed,
            EXACT_TOLERANCE,
            measured={
                "t_end": self.t_end,
                "delta": physics.delta,
                "resolutions": list(cfg.resolutions),
                "errors": errors,
                "ratios": ratios,
            },
            flags={"resolved_exactly": exact, "decreasing": decreasing, "super_algebraic": growing},
            notes=notes,
            status="inconclusive" if inconclusive else None,
        )
        return report, results

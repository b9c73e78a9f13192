"""Type definitions for smaglab."""

from typing import Literal

GradVariant = Literal["frobenius", "strain-rate"]
NormVariant = Literal["derivative-sum", "bessel"]
SchemeMethod = Literal["if-rk4", "if-rk3"]
ForcingKind = Literal["zero", "steady-mode", "steady-multi-mode"]
InitialKind = Literal["zero", "taylor-green", "single-mode", "random-spectrum"]
ExperimentKind = Literal[
    "none", "convergence", "uniqueness", "sweep", "regularity", "stability"
]
Status = Literal["pass", "fail", "no-op", "blow-up", "inconclusive"]

"""Run configuration: parameter bundles and the flat `section.key = value` format.

A configuration file is a list of lines `section.key = value`; `#` starts a
comment and blank lines are ignored. Lists are comma separated. Forcing modes
for `steady-multi-mode` are written `k1 k2 amplitude; k1 k2 amplitude; ...`.

Examples:
    >>> from smaglab.config import parse_config
    >>> cfg = parse_config("grid.N = 32\\nphysics.nu = 0.1\\nscheme.t_end = 1.0\\n")
    >>> cfg.sim.grid.N, cfg.sim.physics.c_s, cfg.sim.scheme.method
    (32, 0.17, 'if-rk4')

"""

import dataclasses
import math
import os
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

from .error import ConfigError, UsageError
from .initial import InitialSpec
from .integrator import SchemeConfig
from .smagorinsky import ForcingMode, ForcingSpec, SmagorinskyParams
from .spectral import Grid, SobolevOrder
from .types import ExperimentKind, InitialKind
from .utils import _format_float

OUTPUT_ROOT = os.environ.get("SMAGLAB_OUTPUT_ROOT", "runs")

EXPERIMENT_KINDS = ("none", "convergence", "uniqueness", "sweep", "regularity", "stability")


@dataclass(frozen=True)
class SimParams:
    """Everything a single simulation needs."""

    grid: Grid
    physics: SmagorinskyParams
    scheme: SchemeConfig
    forcing: ForcingSpec = field(default_factory=ForcingSpec)
    initial: InitialSpec = field(default_factory=InitialSpec)

    def __post_init__(self):
        """Check that the forcing is resolved on the grid."""
        self.forcing.coefficients(self.grid)


def _strictly_monotone(values: tuple, increasing: bool) -> bool:
    pairs = zip(values, values[1:], strict=False)
    return all((a < b) if increasing else (a > b) for a, b in pairs)


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of a study built around a base simulation.

    `seed` and `ic_kind` override the base initial condition when given;
    `t_end` overrides the study's default horizon.
    """

    base: SimParams
    kind: ExperimentKind = "none"
    resolutions: tuple[int, ...] = ()
    nu_list: tuple[float, ...] = ()
    dt_levels: tuple[float, ...] = ()
    s_track: tuple[float, ...] = ()
    seed: int | None = None
    ic_kind: InitialKind | None = None
    t_end: float | None = None
    tail_fraction: float = 0.5
    perturbation: float = 1e-3
    anomaly_threshold: float = 0.5
    record_every: int = 1
    max_workers: int = 1

    def __post_init__(self):
        """Validate the study parameters."""
        for name in ("resolutions", "nu_list", "dt_levels", "s_track"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigError(f"unknown experiment {self.kind!r}", key="experiment.kind")
        if any(n % 2 for n in self.resolutions):
            raise ConfigError("resolutions must be even", key="experiment.resolutions")
        if not _strictly_monotone(self.resolutions, increasing=True):
            raise ConfigError("resolutions must be strictly increasing", key="experiment.resolutions")
        if any(not nu > 0 for nu in self.nu_list):
            raise ConfigError("every nu must be > 0", key="experiment.nu_list")
        if not _strictly_monotone(self.nu_list, increasing=False):
            raise ConfigError("nu_list must be strictly decreasing", key="experiment.nu_list")
        if any(not dt > 0 for dt in self.dt_levels):
            raise ConfigError("every dt must be > 0", key="experiment.dt_levels")
        if not _strictly_monotone(self.dt_levels, increasing=False):
            raise ConfigError("dt_levels must be strictly decreasing", key="experiment.dt_levels")
        for s in self.s_track:
            try:
                SobolevOrder(s)
            except UsageError as exc:
                raise ConfigError(str(exc), key="outputs.s_track") from exc
        if self.t_end is not None and not (math.isfinite(self.t_end) and self.t_end >= 0):
            raise ConfigError("t_end must be >= 0", key="experiment.t_end")
        if not 0 < self.tail_fraction <= 1:
            raise ConfigError("tail_fraction must lie in (0, 1]", key="experiment.tail_fraction")
        if not self.perturbation > 0:
            raise ConfigError("perturbation must be > 0", key="experiment.perturbation")
        if self.record_every < 1:
            raise ConfigError("record_every must be >= 1", key="outputs.record_every")
        if self.max_workers < 1:
            raise ConfigError("max_workers must be >= 1", key="experiment.max_workers")
        if self.ic_kind is not None:
            InitialSpec(kind=self.ic_kind)

    def initial_spec(self) -> InitialSpec:
        """Initial condition of the study runs."""
        changes: dict[str, Any] = {}
        if self.ic_kind is not None:
            changes["kind"] = self.ic_kind
        if self.seed is not None:
            changes["seed"] = self.seed
        return dataclasses.replace(self.base.initial, **changes)


@dataclass(frozen=True)
class RunConfig:
    """A parsed configuration file."""

    experiment: ExperimentConfig
    output_dir: str | None = None
    checkpoint_every: int = 0

    def __post_init__(self):
        """Validate the output settings."""
        if self.checkpoint_every < 0:
            raise ConfigError("checkpoint_every must be >= 0", key="outputs.checkpoint_every")

    @property
    def sim(self) -> SimParams:
        """The base simulation."""
        return self.experiment.base

    def resolve_output_dir(self, name: str) -> str:
        """Output directory of the run, defaulting to `$SMAGLAB_OUTPUT_ROOT/<name>`."""
        if self.output_dir is not None:
            return self.output_dir
        return os.path.join(OUTPUT_ROOT, name)


# value parsers


def _int(text: str) -> int:
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


def _float(text: str) -> float:
    return float(text)


def _str(text: str) -> str:
    if not text:
        raise ValueError("expected a non-empty string")
    return text


def _items(text: str) -> list[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(_int(item) for item in _items(text))


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(item) for item in _items(text))


def _int_pair(text: str) -> tuple[int, int]:
    items = _int_list(text)
    if len(items) != 2:
        raise ValueError(f"expected two integers, got {text!r}")
    return items[0], items[1]


def _modes(text: str) -> tuple[ForcingMode, ...]:
    modes = []
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        parts = chunk.split()
        if len(parts) != 3:
            raise ValueError(f"expected 'k1 k2 amplitude', got {chunk.strip()!r}")
        modes.append(ForcingMode((_int(parts[0]), _int(parts[1])), float(parts[2])))
    return tuple(modes)


_REQUIRED = object()


@dataclass(frozen=True)
class _Key:
    parse: Callable[[str], Any]
    default: Any = None


SCHEMA: dict[str, _Key] = {
    "grid.N": _Key(_int, _REQUIRED),
    "grid.L": _Key(_float, 2.0 * math.pi),
    "physics.nu": _Key(_float, _REQUIRED),
    "physics.c_s": _Key(_float, 0.17),
    "physics.delta": _Key(_float),
    "physics.grad_variant": _Key(_str, "frobenius"),
    "physics.padding": _Key(_float, 1.5),
    "forcing.kind": _Key(_str, "zero"),
    "forcing.k": _Key(_int_pair, (0, 1)),
    "forcing.amplitude": _Key(_float, 1.0),
    "forcing.modes": _Key(_modes),
    "initial.kind": _Key(_str, "taylor-green"),
    "initial.amplitude": _Key(_float, 1.0),
    "initial.k": _Key(_int_pair, (0, 1)),
    "initial.peak_k": _Key(_float, 4.0),
    "initial.seed": _Key(_int, 0),
    "scheme.method": _Key(_str, "if-rk4"),
    "scheme.dt": _Key(_float, 1e-3),
    "scheme.cfl": _Key(_float),
    "scheme.dt_max": _Key(_float, 0.1),
    "scheme.t_end": _Key(_float, _REQUIRED),
    "outputs.directory": _Key(_str),
    "outputs.record_every": _Key(_int, 1),
    "outputs.s_track": _Key(_float_list, ()),
    "outputs.checkpoint_every": _Key(_int, 0),
    "experiment.kind": _Key(_str, "none"),
    "experiment.resolutions": _Key(_int_list, ()),
    "experiment.nu_list": _Key(_float_list, ()),
    "experiment.dt_levels": _Key(_float_list, ()),
    "experiment.seed": _Key(_int),
    "experiment.ic_kind": _Key(_str),
    "experiment.t_end": _Key(_float),
    "experiment.tail_fraction": _Key(_float, 0.5),
    "experiment.perturbation": _Key(_float, 1e-3),
    "experiment.anomaly_threshold": _Key(_float, 0.5),
    "experiment.max_workers": _Key(_int, 1),
}


def _read_lines(text: str) -> tuple[dict[str, Any], dict[str, int]]:
    values: dict[str, Any] = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'section.key = value'", line=lineno)
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in SCHEMA:
            raise ConfigError("unknown key", key=key, line=lineno)
        if key in values:
            raise ConfigError(f"duplicate key (first set on line {lines[key]})", key=key, line=lineno)
        try:
            values[key] = SCHEMA[key].parse(value)
        except ValueError as exc:
            raise ConfigError(f"invalid value {value!r}: {exc}", key=key, line=lineno) from exc
        except ConfigError as exc:
            raise ConfigError(exc.message, key=key, line=lineno) from exc
        lines[key] = lineno
    return values, lines


def _forcing(get: Callable[[str], Any], given: dict[str, Any]) -> ForcingSpec:
    kind = get("forcing.kind")
    if kind == "steady-mode":
        if "forcing.modes" in given:
            raise ConfigError("steady-mode forcing takes forcing.k and forcing.amplitude", key="forcing.modes")
        return ForcingSpec(kind, (ForcingMode(get("forcing.k"), get("forcing.amplitude")),))
    if kind == "steady-multi-mode":
        for key in ("forcing.k", "forcing.amplitude"):
            if key in given:
                raise ConfigError("steady-multi-mode forcing takes forcing.modes", key=key)
        return ForcingSpec(kind, get("forcing.modes") or ())
    for key in ("forcing.k", "forcing.amplitude", "forcing.modes"):
        if key in given:
            raise ConfigError(f"not used with forcing.kind = {kind}", key=key)
    return ForcingSpec(kind)


def _build(values: dict[str, Any]) -> RunConfig:
    missing = [key for key, spec in SCHEMA.items() if spec.default is _REQUIRED and key not in values]
    if missing:
        raise ConfigError("missing required key", key=missing[0])

    def get(key: str) -> Any:
        return values.get(key, SCHEMA[key].default)

    sim = SimParams(
        grid=Grid(get("grid.N"), get("grid.L")),
        physics=SmagorinskyParams(
            nu=get("physics.nu"),
            c_s=get("physics.c_s"),
            delta=get("physics.delta"),
            grad_variant=get("physics.grad_variant"),
            padding=get("physics.padding"),
        ),
        scheme=SchemeConfig(
            t_end=get("scheme.t_end"),
            method=get("scheme.method"),
            dt=get("scheme.dt"),
            cfl=get("scheme.cfl"),
            dt_max=get("scheme.dt_max"),
        ),
        forcing=_forcing(get, values),
        initial=InitialSpec(
            kind=get("initial.kind"),
            amplitude=get("initial.amplitude"),
            k=get("initial.k"),
            peak_k=get("initial.peak_k"),
            seed=get("initial.seed"),
        ),
    )
    experiment = ExperimentConfig(
        base=sim,
        kind=get("experiment.kind"),
        resolutions=get("experiment.resolutions"),
        nu_list=get("experiment.nu_list"),
        dt_levels=get("experiment.dt_levels"),
        s_track=get("outputs.s_track"),
        seed=get("experiment.seed"),
        ic_kind=get("experiment.ic_kind"),
        t_end=get("experiment.t_end"),
        tail_fraction=get("experiment.tail_fraction"),
        perturbation=get("experiment.perturbation"),
        anomaly_threshold=get("experiment.anomaly_threshold"),
        record_every=get("outputs.record_every"),
        max_workers=get("experiment.max_workers"),
    )
    return RunConfig(
        experiment=experiment,
        output_dir=get("outputs.directory"),
        checkpoint_every=get("outputs.checkpoint_every"),
    )


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration file.

    Args:
        text (str): file contents.

    Returns:
        RunConfig: the validated configuration with defaults filled in.

    Raises:
        ConfigError: on syntax errors, unknown or duplicate keys, missing required keys,
            bad values and violated constraints; the key and line are attached when known.

    """
    values, lines = _read_lines(text)
    try:
        return _build(values)
    except ConfigError as exc:
        if exc.line is None and exc.key in lines:
            raise ConfigError(exc.message, key=exc.key, line=lines[exc.key]) from exc
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | os.PathLike[str]) -> RunConfig:
    """Read and parse a configuration file."""
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {os.fspath(path)}: {exc.strerror}") from exc
    return parse_config(text)


def _format(value: Any) -> str:
    if isinstance(value, bool):
        raise TypeError("booleans are not part of the format")
    if isinstance(value, float):
        return _format_float(value)
    if isinstance(value, tuple) and value and isinstance(value[0], ForcingMode):
        return "; ".join(f"{m.k[0]} {m.k[1]} {_format_float(m.amplitude)}" for m in value)
    if isinstance(value, tuple):
        return ", ".join(_format(v) for v in value)
    return str(value)


def dump_config(cfg: RunConfig) -> str:
    """Emit the effective configuration, defaults resolved.

    Parsing the result gives back an equal `RunConfig`.
    """
    sim, exp = cfg.sim, cfg.experiment
    entries: dict[str, Any] = {
        "grid.N": sim.grid.N,
        "grid.L": sim.grid.L,
        "physics.nu": sim.physics.nu,
        "physics.c_s": sim.physics.c_s,
        "physics.delta": sim.physics.delta,
        "physics.grad_variant": sim.physics.grad_variant,
        "physics.padding": sim.physics.padding,
        "forcing.kind": sim.forcing.kind,
    }
    if sim.forcing.kind == "steady-mode":
        (mode,) = sim.forcing.modes
        entries["forcing.k"] = mode.k
        entries["forcing.amplitude"] = mode.amplitude
    elif sim.forcing.kind == "steady-multi-mode":
        entries["forcing.modes"] = sim.forcing.modes
    entries.update(
        {
            "initial.kind": sim.initial.kind,
            "initial.amplitude": sim.initial.amplitude,
            "initial.k": sim.initial.k,
            "initial.peak_k": sim.initial.peak_k,
            "initial.seed": sim.initial.seed,
            "scheme.method": sim.scheme.method,
            "scheme.dt": sim.scheme.dt,
            "scheme.cfl": sim.scheme.cfl,
            "scheme.dt_max": sim.scheme.dt_max,
            "scheme.t_end": sim.scheme.t_end,
            "outputs.directory": cfg.output_dir,
            "outputs.record_every": exp.record_every,
            "outputs.s_track": exp.s_track,
            "outputs.checkpoint_every": cfg.checkpoint_every,
            "experiment.kind": exp.kind,
            "experiment.resolutions": exp.resolutions,
            "experiment.nu_list": exp.nu_list,
            "experiment.dt_levels": exp.dt_levels,
            "experiment.seed": exp.seed,
            "experiment.ic_kind": exp.ic_kind,
            "experiment.t_end": exp.t_end,
            "experiment.tail_fraction": exp.tail_fraction,
            "experiment.perturbation": exp.perturbation,
            "experiment.anomaly_threshold": exp.anomaly_threshold,
            "experiment.max_workers": exp.max_workers,
        }
    )

    out: list[str] = []
    section = None
    for key, value in entries.items():
        # empty lists and unset optional keys are left out
        if value is None or value == ():
            continue
        this = key.split(".", 1)[0]
        if this != section:
            if section is not None:
                out.append("")
            out.append(f"# {this}")
            section = this
        out.append(f"{key} = {_format(value)}")
    return "\n".join(out) + "\n"

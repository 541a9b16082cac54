"""Run configuration: TOML files with [problem], [grid], [integrator], [output]
and an optional [properties] section.  See docs/config.md for the schema."""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .expr import ExprError
from .lift import SmoothFunction
from .model import (
    BoundaryConditions,
    InputSignal,
    Kernel,
    ModelError,
    PiecewiseFunction,
    ProblemSpec,
    make_example1,
    make_example2,
)
from .ode import IntegratorConfig

__all__ = ["ConfigError", "RunConfig", "PropertiesConfig", "load_config", "config_from_dict"]

BUILTINS = {"example1": make_example1, "example2": make_example2}
DEFAULT_SWEEP = tuple(range(10, 101, 10))


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PropertiesConfig:
    sweep: tuple | None = None
    consistency_sweep: tuple | None = None
    sobolev_sweep: tuple | None = None
    sobolev_samples: int = 200
    mu2: float = 3.0
    xi: SmoothFunction | None = None
    t_min: float = 1e-3
    t_count: int = 40
    seed: int = 0


@dataclass(frozen=True)
class RunConfig:
    problem_name: str
    spec: ProblemSpec
    initial: PiecewiseFunction
    signal: InputSignal
    T: float = 1.0
    sweep: tuple = DEFAULT_SWEEP
    reference_n: int = 200
    integrator: IntegratorConfig = IntegratorConfig()
    output_dir: Path = Path("out")
    properties: PropertiesConfig = field(default_factory=PropertiesConfig)

    @property
    def sample_count(self) -> int:
        return self.integrator.sample_count


def _piecewise(raw, where: str) -> PiecewiseFunction:
    if isinstance(raw, (int, float)):
        return PiecewiseFunction.constant(raw)
    if isinstance(raw, str):
        return PiecewiseFunction.of(raw)
    if isinstance(raw, dict):
        try:
            return PiecewiseFunction(
                tuple(raw["breakpoints"]), tuple(raw["pieces"]), tuple(raw.get("sides", ()))
            )
        except KeyError as exc:
            raise ConfigError(f"{where}: missing key {exc}") from None
    raise ConfigError(f"{where}: expected an expression string or a table")


def _ints(raw, where: str) -> tuple:
    if not isinstance(raw, list) or not raw or not all(isinstance(v, int) for v in raw):
        raise ConfigError(f"{where}: expected a non-empty list of integers")
    return tuple(raw)


def _problem(raw: dict):
    name = raw.get("builtin")
    if name is not None:
        if name not in BUILTINS:
            raise ConfigError(f"problem.builtin: unknown problem {name!r} (known: {', '.join(BUILTINS)})")
        return (name, *BUILTINS[name]())
    required = ("theta", "sigma", "lambda", "kernel", "alpha0", "beta0", "alpha1", "beta1", "initial", "input")
    missing = [k for k in required if k not in raw]
    if missing:
        raise ConfigError(f"problem: missing {', '.join(missing)} (or set builtin)")
    spec = ProblemSpec(
        theta=_piecewise(raw["theta"], "problem.theta"),
        sigma=_piecewise(raw["sigma"], "problem.sigma"),
        lam=_piecewise(raw["lambda"], "problem.lambda"),
        phi=Kernel(str(raw["kernel"])),
        bc=BoundaryConditions(*(float(raw[k]) for k in ("alpha0", "beta0", "alpha1", "beta1"))),
    )
    u0 = _piecewise(raw["initial"], "problem.initial")
    signal = InputSignal(
        str(raw["input"]),
        scaled=bool(raw.get("input_scaled", False)),
        zeros=tuple(raw.get("input_zeros", ())),
    )
    return "inline", spec, u0, signal


def config_from_dict(raw: dict, base_dir: Path | None = None) -> RunConfig:
    try:
        return _build(raw, base_dir or Path.cwd())
    except (ExprError, ModelError) as exc:
        raise ConfigError(str(exc)) from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def _build(raw: dict, base_dir: Path) -> RunConfig:
    unknown = set(raw) - {"problem", "grid", "integrator", "output", "properties"}
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")
    name, spec, u0, signal = _problem(raw.get("problem", {"builtin": "example1"}))

    grid = raw.get("grid", {})
    sweep = _ints(grid["sweep"], "grid.sweep") if "sweep" in grid else DEFAULT_SWEEP
    reference_n = int(grid.get("reference_n", 200))
    if any(n >= reference_n for n in sweep):
        raise ConfigError(f"grid.reference_n={reference_n} must exceed every sweep n")
    if min(sweep) < 3:
        raise ConfigError("grid.sweep: every n must be at least 3")

    integ = raw.get("integrator", {})
    T = float(integ.get("T", 1.0))
    if not T > 0:
        raise ConfigError("integrator.T must be positive")
    icfg = IntegratorConfig(
        step_count=int(integ.get("step_count", IntegratorConfig.step_count)),
        sample_count=int(integ.get("sample_count", IntegratorConfig.sample_count)),
        scheme=str(integ.get("scheme", "crank_nicolson")),
    )

    out = raw.get("output", {})
    out_dir = Path(out.get("directory", "out"))
    if not out_dir.is_absolute():
        out_dir = base_dir / out_dir

    props_raw = raw.get("properties", {})
    xi = None
    if "xi" in props_raw:
        x = props_raw["xi"]
        try:
            xi = SmoothFunction(x["f"], x["dx"], x["dxx"])
        except KeyError as exc:
            raise ConfigError(f"properties.xi: missing key {exc}") from None
    props = PropertiesConfig(
        sweep=_ints(props_raw["sweep"], "properties.sweep") if "sweep" in props_raw else None,
        consistency_sweep=(_ints(props_raw["consistency_sweep"], "properties.consistency_sweep")
                           if "consistency_sweep" in props_raw else None),
        sobolev_sweep=(_ints(props_raw["sobolev_sweep"], "properties.sobolev_sweep")
                       if "sobolev_sweep" in props_raw else None),
        sobolev_samples=int(props_raw.get("sobolev_samples", 200)),
        mu2=float(props_raw.get("mu2", 3.0)),
        xi=xi,
        t_min=float(props_raw.get("t_min", 1e-3)),
        t_count=int(props_raw.get("t_count", 40)),
        seed=int(props_raw.get("seed", 0)),
    )
    return RunConfig(name, spec, u0, signal, T, sweep, reference_n, icfg, out_dir, props)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(raw, path.parent)

"""TOML run configurations, shipped presets and dict round-trips.

A configuration file looks like::

    name = "fig1"

    [resonator]
    omega_r = 0.5
    q_factor = 5.0
    epsilon = 0.1
    omega_p = 1.0
    beta = 1.0
    capacitance = 1.0

    [drive]
    kind = "sinusoid"      # zero | sinusoid | power | tabulated
    xi0 = 0.2
    omega_d = 1.0

    [init]
    kind = "energy"        # energy | state
    e0 = 1.0

    [run]
    horizon = [0.0, 50.0]
    window = [0.0, 10.0]

Optional tables: ``[integrator]``, ``[sweep]``, ``[optimize]``, ``[output]``.
Unknown keys anywhere are rejected.
"""

from __future__ import annotations

import hashlib
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .dynamics import IntegratorConfig
from .errors import ConfigError
from .model import (
    DriveSpec,
    EnergyInit,
    InitialConditions,
    PowerDrive,
    ResonatorParams,
    SinusoidDrive,
    StateInit,
    TabulatedDrive,
    ZeroDrive,
)

PRESETS = ("fig1", "fig2", "fig3")

# config key -> ResonatorParams field
RESONATOR_KEYS = {
    "omega_r": "omega_r",
    "q_factor": "q_factor",
    "epsilon": "epsilon",
    "omega_p": "omega_p",
    "beta": "beta",
    "alpha": "alpha",
    "lambda": "lambda_corr",
    "capacitance": "capacitance",
}
DRIVE_KEYS = {
    "zero": set(),
    "sinusoid": {"xi0", "omega_d", "theta"},
    "power": {"xi0", "exponent", "delta"},
    "tabulated": {"samples"},
}
INIT_KEYS = {"energy": {"e0"}, "state": {"phi0", "phidot0"}}
INTEGRATOR_KEYS = {"rel_tol", "abs_tol", "max_step", "sample_dt", "damped", "method"}
RUN_KEYS = {"horizon", "window"}
SWEEP_KEYS = {"axis", "values", "numerical", "horizon", "window", "sample_dt"}
OPTIMIZE_KEYS = {"search", "tol", "window", "xi0", "sample_dt"}
OUTPUT_KEYS = {"dir"}
TOP_KEYS = {"name", "resonator", "drive", "init", "integrator", "run", "sweep", "optimize", "output"}

OPTIMAL_EXPONENT = 1.5


def _check_keys(table: dict, allowed, where: str):
    for key in table:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in {where}")


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{where} must be finite")
    return value


def _pair(value, where: str) -> tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(f"{where} must be a pair [a, b]")
    a, b = (_number(v, where) for v in value)
    if not b > a:
        raise ConfigError(f"{where} must satisfy a < b, got [{a}, {b}]")
    return a, b


# -- dict round-trips -------------------------------------------------------


def params_to_dict(params: ResonatorParams) -> dict:
    fields_ = asdict(params)
    return {key: fields_[attr] for key, attr in RESONATOR_KEYS.items()}


def params_from_dict(table: dict) -> ResonatorParams:
    _check_keys(table, RESONATOR_KEYS, "[resonator]")
    kwargs = {RESONATOR_KEYS[k]: _number(v, f"resonator.{k}") for k, v in table.items()}
    try:
        return ResonatorParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"[resonator]: {exc}") from exc


def drive_to_dict(drive: DriveSpec) -> dict:
    if isinstance(drive, ZeroDrive):
        return {"kind": "zero"}
    if isinstance(drive, SinusoidDrive):
        return {"kind": "sinusoid", "xi0": drive.xi0, "omega_d": drive.omega_d, "theta": drive.theta}
    if isinstance(drive, PowerDrive):
        return {"kind": "power", "xi0": drive.xi0, "exponent": drive.exponent}
    if isinstance(drive, TabulatedDrive):
        return {"kind": "tabulated", "samples": [[t, x] for t, x in zip(drive.times, drive.values)]}
    raise TypeError(f"unknown drive {drive!r}")


def drive_from_dict(table: dict) -> DriveSpec:
    table = dict(table)
    kind = table.pop("kind", "zero")
    if kind not in DRIVE_KEYS:
        raise ConfigError(f"unknown drive kind {kind!r}; expected one of {sorted(DRIVE_KEYS)}")
    _check_keys(table, DRIVE_KEYS[kind], f"[drive] (kind = {kind!r})")
    try:
        if kind == "zero":
            return ZeroDrive()
        if kind == "sinusoid":
            return SinusoidDrive(
                _number(table.get("xi0", 0.0), "drive.xi0"),
                _number(table.get("omega_d", 0.0), "drive.omega_d"),
                _number(table.get("theta", 0.0), "drive.theta"),
            )
        if kind == "power":
            if "exponent" in table and "delta" in table:
                raise ConfigError("[drive] takes either exponent or delta, not both")
            if "delta" in table:
                exponent = OPTIMAL_EXPONENT + _number(table["delta"], "drive.delta")
            else:
                exponent = _number(table.get("exponent", OPTIMAL_EXPONENT), "drive.exponent")
            return PowerDrive(_number(table.get("xi0", 0.0), "drive.xi0"), exponent)
        samples = table.get("samples", [])
        pairs = [(_number(p[0], "drive.samples"), _number(p[1], "drive.samples")) for p in samples]
        return TabulatedDrive.from_pairs(pairs)
    except (ValueError, IndexError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"[drive]: {exc}") from exc


def init_to_dict(init: InitialConditions) -> dict:
    if isinstance(init, EnergyInit):
        return {"kind": "energy", "e0": init.e0}
    return {"kind": "state", "phi0": init.phi0, "phidot0": init.phidot0}


def init_from_dict(table: dict) -> InitialConditions:
    table = dict(table)
    kind = table.pop("kind", "energy")
    if kind not in INIT_KEYS:
        raise ConfigError(f"unknown init kind {kind!r}; expected energy or state")
    _check_keys(table, INIT_KEYS[kind], f"[init] (kind = {kind!r})")
    try:
        if kind == "energy":
            return EnergyInit(_number(table.get("e0", 1.0), "init.e0"))
        return StateInit(_number(table.get("phi0", 0.0), "init.phi0"), _number(table.get("phidot0", 0.0), "init.phidot0"))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"[init]: {exc}") from exc


def integrator_to_dict(cfg: IntegratorConfig) -> dict:
    out = asdict(cfg)
    if out["max_step"] is None:
        del out["max_step"]
    return out


def integrator_from_dict(table: dict) -> IntegratorConfig:
    _check_keys(table, INTEGRATOR_KEYS, "[integrator]")
    kwargs: dict[str, Any] = {}
    for key, value in table.items():
        if key == "damped":
            if not isinstance(value, bool):
                raise ConfigError("integrator.damped must be true or false")
            kwargs[key] = value
        elif key == "method":
            kwargs[key] = str(value)
        else:
            kwargs[key] = _number(value, f"integrator.{key}")
    try:
        return IntegratorConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"[integrator]: {exc}") from exc


# -- run configuration ------------------------------------------------------


@dataclass(frozen=True)
class SweepSection:
    axis: str
    values: tuple[float, ...]
    numerical: bool = False
    horizon: Optional[tuple[float, float]] = None
    window: Optional[tuple[float, float]] = None
    sample_dt: Optional[float] = None


@dataclass(frozen=True)
class OptimizeSection:
    search: tuple[float, float] = (0.5, 3.0)
    tol: float = 1e-3
    window: Optional[tuple[float, float]] = None
    xi0: Optional[float] = None
    sample_dt: Optional[float] = None


@dataclass(frozen=True)
class RunConfig:
    name: str
    params: ResonatorParams
    drive: DriveSpec
    init: InitialConditions
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    horizon: tuple[float, float] = (0.0, 50.0)
    window: Optional[tuple[float, float]] = None
    sweep: Optional[SweepSection] = None
    optimize: OptimizeSection = field(default_factory=OptimizeSection)
    output_dir: Optional[str] = None

    def to_dict(self) -> dict:
        out: dict[str, Any] = {
            "name": self.name,
            "resonator": params_to_dict(self.params),
            "drive": drive_to_dict(self.drive),
            "init": init_to_dict(self.init),
            "integrator": integrator_to_dict(self.integrator),
            "run": {"horizon": list(self.horizon)},
        }
        if self.window is not None:
            out["run"]["window"] = list(self.window)
        if self.sweep is not None:
            sweep = {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(self.sweep).items() if v is not None}
            out["sweep"] = sweep
        out["optimize"] = {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(self.optimize).items() if v is not None}
        if self.output_dir is not None:
            out["output"] = {"dir": self.output_dir}
        return out

    def config_hash(self) -> str:
        return config_hash(self.to_dict())


def config_hash(resolved: dict) -> str:
    blob = json.dumps(resolved, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return "sha256:" + hashlib.sha256(blob.encode("utf-8")).hexdigest()


def config_from_dict(raw: dict, default_name: str = "run") -> RunConfig:
    _check_keys(raw, TOP_KEYS, "top level")
    for table in ("resonator", "drive", "init", "integrator", "run", "sweep", "optimize", "output"):
        if table in raw and not isinstance(raw[table], dict):
            raise ConfigError(f"[{table}] must be a table")
    params = params_from_dict(raw.get("resonator", {}))
    drive = drive_from_dict(raw.get("drive", {"kind": "zero"}))
    init = init_from_dict(raw.get("init", {"kind": "energy", "e0": 1.0}))
    integrator = integrator_from_dict(raw.get("integrator", {}))

    run = raw.get("run", {})
    _check_keys(run, RUN_KEYS, "[run]")
    horizon = _pair(run["horizon"], "run.horizon") if "horizon" in run else (0.0, 50.0)
    window = _pair(run["window"], "run.window") if "window" in run else None

    sweep = None
    if "sweep" in raw:
        table = raw["sweep"]
        _check_keys(table, SWEEP_KEYS, "[sweep]")
        if "axis" not in table:
            raise ConfigError("[sweep] needs an axis")
        values = table.get("values", [])
        if not isinstance(values, list) or not values:
            raise ConfigError("sweep.values must be a non-empty list")
        sweep = SweepSection(
            axis=str(table["axis"]),
            values=tuple(_number(v, "sweep.values") for v in values),
            numerical=bool(table.get("numerical", False)),
            horizon=_pair(table["horizon"], "sweep.horizon") if "horizon" in table else None,
            window=_pair(table["window"], "sweep.window") if "window" in table else None,
            sample_dt=_number(table["sample_dt"], "sweep.sample_dt") if "sample_dt" in table else None,
        )

    table = raw.get("optimize", {})
    _check_keys(table, OPTIMIZE_KEYS, "[optimize]")
    optimize = OptimizeSection(
        search=_pair(table["search"], "optimize.search") if "search" in table else (0.5, 3.0),
        tol=_number(table.get("tol", 1e-3), "optimize.tol"),
        window=_pair(table["window"], "optimize.window") if "window" in table else None,
        xi0=_number(table["xi0"], "optimize.xi0") if "xi0" in table else None,
        sample_dt=_number(table["sample_dt"], "optimize.sample_dt") if "sample_dt" in table else None,
    )
    if not optimize.tol > 0:
        raise ConfigError("optimize.tol must be > 0")

    output = raw.get("output", {})
    _check_keys(output, OUTPUT_KEYS, "[output]")
    name = str(raw.get("name", default_name))
    return RunConfig(name, params, drive, init, integrator, horizon, window, sweep, optimize, output.get("dir"))


def parse_toml(text: str, default_name: str = "run") -> RunConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed TOML: {exc}") from exc
    return config_from_dict(raw, default_name)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_toml(text, default_name=path.stem)


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    return resources.files("fluxres.presets").joinpath(f"{name}.toml").read_text(encoding="utf-8")


def load_preset(name: str) -> RunConfig:
    return parse_toml(preset_text(name), default_name=name)

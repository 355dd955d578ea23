"""Parameter sweeps and the adiabatic convergence study."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import config as cfg
from .dynamics import IntegratorConfig, cycle_mean, find_cycles, integrate
from .errors import InsufficientCycles, NonPositiveFrequencySquared, NumericalFailure
from .invariant import (
    DriftMetrics,
    InvariantSeries,
    default_window,
    drift_metrics,
    invariant_series_closed_form,
    invariant_series_numerical,
)
from .model import (
    DriveSpec,
    EnergyInit,
    InitialConditions,
    PowerDrive,
    ResonatorParams,
    SinusoidDrive,
    closed_form_energy,
)

DRIVE_AXES = {"xi0", "omega_d", "theta", "exponent", "delta"}
AXES = set(cfg.RESONATOR_KEYS) | DRIVE_AXES | {"e0"}


@dataclass(frozen=True)
class SweepSpec:
    params: ResonatorParams
    drive: DriveSpec
    init: InitialConditions
    axis: str
    values: tuple[float, ...]
    horizon: tuple[float, float]
    sample_dt: float
    window: Optional[tuple[float, float]] = None
    numerical: bool = False
    integrator: IntegratorConfig = IntegratorConfig()

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"unknown sweep axis {self.axis!r}; expected one of {sorted(AXES)}")
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ValueError("sweep needs at least one value")
        if not all(math.isfinite(v) for v in values):
            raise ValueError("sweep values must be finite")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_config(cls, run: cfg.RunConfig) -> "SweepSpec":
        if run.sweep is None:
            raise ValueError(f"config {run.name!r} has no [sweep] table")
        s = run.sweep
        return cls(
            run.params, run.drive, run.init, s.axis, s.values,
            horizon=s.horizon or run.horizon,
            sample_dt=s.sample_dt or run.integrator.sample_dt,
            window=s.window or run.window,
            numerical=s.numerical,
            integrator=run.integrator,
        )


def materialize(params: ResonatorParams, drive: DriveSpec, init: InitialConditions, axis: str, value: float):
    """Apply one sweep value to the base setup."""
    if axis in cfg.RESONATOR_KEYS:
        try:
            return params.replace(**{cfg.RESONATOR_KEYS[axis]: value}), drive, init
        except ValueError as exc:
            raise ValueError(f"sweep {axis}={value!r}: {exc}") from exc
    if axis == "e0":
        if not isinstance(init, EnergyInit):
            raise ValueError("axis e0 needs an energy initial condition")
        return params, drive, EnergyInit(value)
    if axis in ("exponent", "delta"):
        if not isinstance(drive, PowerDrive):
            raise ValueError(f"axis {axis} needs a power drive")
        exponent = value if axis == "exponent" else cfg.OPTIMAL_EXPONENT + value
        return params, replace(drive, exponent=exponent), init
    if axis == "xi0":
        if not isinstance(drive, (SinusoidDrive, PowerDrive)):
            raise ValueError("axis xi0 needs a sinusoid or power drive")
        return params, replace(drive, xi0=value), init
    if not isinstance(drive, SinusoidDrive):
        raise ValueError(f"axis {axis} needs a sinusoid drive")
    return params, replace(drive, **{axis: value}), init


@dataclass(frozen=True)
class SweepEntry:
    value: float
    series: InvariantSeries
    metrics: DriftMetrics
    provenance: dict
    numerical_series: Optional[InvariantSeries] = None
    numerical_metrics: Optional[DriftMetrics] = None


@dataclass(frozen=True)
class SweepResult:
    axis: str
    entries: tuple[SweepEntry, ...]

    def by_value(self) -> dict[float, SweepEntry]:
        return {e.value: e for e in self.entries}

    def metric(self, name: str = "rms_dev") -> list[float]:
        return [getattr(e.metrics, name) for e in self.entries]


def provenance(params, drive, init, horizon, sample_dt, window, numerical=False, integrator=None) -> dict:
    block = {
        "resonator": cfg.params_to_dict(params),
        "drive": cfg.drive_to_dict(drive),
        "init": cfg.init_to_dict(init),
        "horizon": list(horizon),
        "sample_dt": sample_dt,
        "window": list(window),
        "numerical": numerical,
    }
    if integrator is not None:
        block["integrator"] = cfg.integrator_to_dict(integrator)
    block["hash"] = cfg.config_hash(block)
    return block


def evaluate_point(params, drive, init, horizon, sample_dt, window=None, numerical=False,
                   integrator: IntegratorConfig = IntegratorConfig(), value: float = math.nan) -> SweepEntry:
    window = tuple(window) if window is not None else default_window(params)
    series = invariant_series_closed_form(params, drive, init, horizon, sample_dt)
    metrics = drift_metrics(series, window)
    num_series = num_metrics = None
    if numerical:
        traj = integrate(params, drive, init, integrator, horizon)
        num_series = invariant_series_numerical(traj)
        num_metrics = drift_metrics(num_series, window)
    prov = provenance(params, drive, init, horizon, sample_dt, window, numerical, integrator if numerical else None)
    return SweepEntry(value, series, metrics, prov, num_series, num_metrics)


def replay(block: dict) -> SweepEntry:
    """Recompute a sweep entry from its provenance block alone."""
    integrator = cfg.integrator_from_dict(block["integrator"]) if "integrator" in block else IntegratorConfig()
    return evaluate_point(
        cfg.params_from_dict(block["resonator"]),
        cfg.drive_from_dict(block["drive"]),
        cfg.init_from_dict(block["init"]),
        tuple(block["horizon"]),
        block["sample_dt"],
        tuple(block["window"]),
        block.get("numerical", False),
        integrator,
    )


def run_sweep(spec: SweepSpec, max_workers: Optional[int] = None) -> SweepResult:
    """Evaluate every sweep value; entries come back in the order of ``spec.values``.

    Points are independent, so ``max_workers > 1`` evaluates them on a thread
    pool without changing the result.
    """

    def one(value):
        params, drive, init = materialize(spec.params, spec.drive, spec.init, spec.axis, value)
        try:
            return evaluate_point(params, drive, init, spec.horizon, spec.sample_dt, spec.window,
                                  spec.numerical, spec.integrator, value)
        except NonPositiveFrequencySquared as exc:
            err = NonPositiveFrequencySquared(exc.t, exc.omega_sq, f"sweep {spec.axis}={value!r}: {exc}")
            err.sweep_value = value
            raise err from exc

    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            done = dict(zip(spec.values, pool.map(one, spec.values)))
    else:
        done = {v: one(v) for v in spec.values}
    return SweepResult(spec.axis, tuple(done[v] for v in spec.values))


# -- convergence ------------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceRow:
    scale: float
    discrepancy: float
    cycles: int


@dataclass(frozen=True)
class ConvergenceTable:
    rows: tuple[ConvergenceRow, ...]

    @property
    def strictly_decreasing(self) -> bool:
        d = [r.discrepancy for r in self.rows]
        return all(b < a for a, b in zip(d, d[1:]))

    def as_list(self) -> list[dict]:
        return [{"scale": r.scale, "discrepancy": r.discrepancy, "cycles": r.cycles} for r in self.rows]


def slowed(params: ResonatorParams, drive: DriveSpec, scale: float):
    """Scale the pump strength, pump frequency and drive frequency together."""
    params = params.replace(epsilon=params.epsilon * scale, omega_p=params.omega_p * scale)
    if isinstance(drive, SinusoidDrive):
        drive = replace(drive, omega_d=drive.omega_d * scale)
    return params, drive


def energy_discrepancy(params, drive, init, horizon, integrator: IntegratorConfig = IntegratorConfig()):
    """Largest per-cycle relative gap between simulated and closed-form energy.

    Both sides are averaged over the same cycle (between upward zero-crossings
    of phi) so the comparison is free of intra-cycle ripple.
    """
    traj = integrate(params, drive, init, integrator, horizon)
    cycles = find_cycles(traj)
    if not cycles:
        raise InsufficientCycles("no complete oscillation cycle inside the horizon")
    e_cf = np.asarray(closed_form_energy(params, drive, init, traj.t))
    worst = 0.0
    for c in cycles:
        num = cycle_mean(traj, traj.energy, c)
        ref = cycle_mean(traj, e_cf, c)
        worst = max(worst, abs(num - ref) / abs(ref))
    return worst, len(cycles)


def run_convergence_study(params: ResonatorParams, drive: DriveSpec, init: InitialConditions, rungs: int = 3,
                          horizon: tuple[float, float] = (0.0, 60.0),
                          integrator: IntegratorConfig = IntegratorConfig()) -> ConvergenceTable:
    """Energy discrepancy as (epsilon, omega_p, omega_d) are scaled by 2**-k, k = 0..rungs-1."""
    if params.alpha != 0:
        raise ValueError("the closed-form energy assumes alpha = 0")
    if rungs < 1:
        raise ValueError("rungs must be >= 1")
    rows = []
    for k in range(rungs):
        scale = 2.0**-k
        p, d = slowed(params, drive, scale)
        try:
            disc, n = energy_discrepancy(p, d, init, horizon, integrator)
        except NumericalFailure as exc:
            raise NumericalFailure(f"rung {k} (scale {scale}): {exc}") from exc
        except InsufficientCycles as exc:
            raise InsufficientCycles(f"rung {k} (scale {scale}): {exc}") from exc
        rows.append(ConvergenceRow(scale, disc, n))
    return ConvergenceTable(tuple(rows))

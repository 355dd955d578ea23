"""Invariant time series and how constant they stay."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import Trajectory, cycle_mean, find_cycles, sample_grid
from .errors import EmptyWindow, InsufficientCycles
from .model import DriveSpec, InitialConditions, ResonatorParams, closed_form_invariant, eval_omega, validate_params


@dataclass(frozen=True)
class InvariantSeries:
    t: np.ndarray
    values: np.ndarray
    source: str  # "closed_form" or "numerical"

    def __post_init__(self):
        t = np.array(self.t, dtype=float)
        v = np.array(self.values, dtype=float)
        if t.shape != v.shape:
            raise ValueError("times and values differ in length")
        if len(t) > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("series times must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("series values must be finite")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.t)


@dataclass(frozen=True)
class DriftMetrics:
    window: tuple[float, float]
    mean: float
    peak_to_peak: float
    rms_dev: float

    def as_dict(self) -> dict:
        return {
            "window": list(self.window),
            "mean": self.mean,
            "peak_to_peak": self.peak_to_peak,
            "rms_dev": self.rms_dev,
        }


def default_window(params: ResonatorParams) -> tuple[float, float]:
    """``[5 Q/omega_r, 10 Q/omega_r]``: the transient has decayed to e^-5 by then."""
    tau = params.q_factor / params.omega_r
    return 5 * tau, 10 * tau


def late_window(params: ResonatorParams) -> tuple[float, float]:
    tau = params.q_factor / params.omega_r
    return 20 * tau, 24 * tau


def invariant_series_closed_form(params: ResonatorParams, drive: DriveSpec, init: InitialConditions,
                                 horizon: tuple[float, float], sample_dt: float) -> InvariantSeries:
    validate_params(params, drive, horizon)
    t = sample_grid(float(horizon[0]), float(horizon[1]), sample_dt)
    return InvariantSeries(t, np.atleast_1d(closed_form_invariant(params, drive, init, t)), "closed_form")


def invariant_series_numerical(trajectory: Trajectory) -> InvariantSeries:
    """Cycle-averaged energy over omega at each cycle midpoint."""
    cycles = find_cycles(trajectory)
    if len(cycles) < 2:
        raise InsufficientCycles(
            f"numerical invariant needs >= 3 upward zero-crossings of phi, found {len(cycles) + 1 if cycles else '< 2'}"
        )
    tc = np.array([c.midpoint for c in cycles])
    e_cyc = np.array([cycle_mean(trajectory, trajectory.energy, c) for c in cycles])
    return InvariantSeries(tc, e_cyc / eval_omega(trajectory.params, tc), "numerical")


def drift_metrics(series: InvariantSeries, window: tuple[float, float]) -> DriftMetrics:
    a, b = float(window[0]), float(window[1])
    mask = (series.t >= a) & (series.t <= b)
    v = series.values[mask]
    if len(v) < 2:
        raise EmptyWindow(f"window [{a}, {b}] holds {len(v)} sample(s); need >= 2")
    mean = float(np.mean(v))
    ptp = float(np.max(v) - np.min(v))
    rms = float(np.sqrt(np.mean((v - mean) ** 2)))
    if ptp == 0.0:
        rms = 0.0  # exact zero for constant series despite mean rounding
    return DriftMetrics((a, b), mean, ptp, min(rms, ptp))

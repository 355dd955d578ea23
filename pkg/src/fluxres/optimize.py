"""Recover the drive exponent that keeps the late-time invariant flat."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import FlatObjective
from .invariant import late_window
from .model import InitialConditions, PowerDrive, ResonatorParams, closed_form_invariant, validate_params

PRESCAN_POINTS = 16
FLAT_THRESHOLD = 1e-15
INV_PHI = (math.sqrt(5) - 1) / 2


def _window_grid(params: ResonatorParams, window, sample_dt: Optional[float]):
    a, b = float(window[0]), float(window[1])
    dt = sample_dt if sample_dt is not None else params.pump_period / 256
    n = int(math.ceil((b - a) / dt)) + 1
    return np.linspace(a, b, n)


def drift_objective(params: ResonatorParams, init: InitialConditions, p: float, window=None,
                    xi0: float = 1.0, sample_dt: Optional[float] = None) -> float:
    """Peak-to-peak of the closed-form invariant on ``window`` with ``xi = xi0 omega^p``."""
    window = late_window(params) if window is None else window
    drive = PowerDrive(xi0, p)
    validate_params(params, drive, window)
    values = closed_form_invariant(params, drive, init, _window_grid(params, window, sample_dt))
    return float(np.max(values) - np.min(values))


@dataclass(frozen=True)
class OptimizationResult:
    p_star: float
    objective_at_p_star: float
    evaluations: int
    bracket: tuple[float, float]
    trace: tuple[tuple[float, float], ...] = field(repr=False)

    def as_dict(self) -> dict:
        return {
            "p_star": self.p_star,
            "objective_at_p_star": self.objective_at_p_star,
            "evaluations": self.evaluations,
            "bracket": list(self.bracket),
            "trace": [list(pt) for pt in self.trace],
        }


def golden_section(f, a: float, b: float, tol: float, trace: list):
    """Shrink ``[a, b]`` around a minimum of a unimodal ``f`` until ``b - a <= tol``."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    trace += [(c, fc), (d, fd)]
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
            trace.append((c, fc))
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
            trace.append((d, fd))
    return a, b


def find_optimal_exponent(params: ResonatorParams, init: InitialConditions, xi0: float,
                          search: tuple[float, float] = (0.5, 3.0), tol: float = 1e-3,
                          window=None, sample_dt: Optional[float] = None) -> OptimizationResult:
    """Golden-section search for the drift-minimising exponent.

    A 16-point grid locates the basin first; the golden-section search then
    runs only on the two grid cells around the best grid point.
    """
    lo, hi = float(search[0]), float(search[1])
    if not hi > lo:
        raise ValueError(f"search interval must satisfy a < b, got {search!r}")
    if not tol > 0:
        raise ValueError("tol must be > 0")
    window = late_window(params) if window is None else tuple(window)

    def f(p):
        return drift_objective(params, init, p, window, xi0, sample_dt)

    grid = np.linspace(lo, hi, PRESCAN_POINTS)
    trace = [(float(p), f(p)) for p in grid]
    objectives = [o for _, o in trace]
    if max(objectives) - min(objectives) < FLAT_THRESHOLD:
        raise FlatObjective(
            f"flat objective: drift varies by {max(objectives) - min(objectives):.3g} over p in [{lo}, {hi}]"
            + (" (xi0 = 0 leaves no drive term)" if xi0 == 0 else "")
        )
    i = int(np.argmin(objectives))
    a, b = float(grid[max(i - 1, 0)]), float(grid[min(i + 1, PRESCAN_POINTS - 1)])
    a, b = golden_section(f, a, b, tol, trace)

    inside = [(p, o) for p, o in trace if a <= p <= b]
    p_star, best = min(inside, key=lambda pt: pt[1]) if inside else min(trace, key=lambda pt: pt[1])
    return OptimizationResult(float(p_star), float(best), len(trace), (a, b), tuple(trace))

"""Direct integration of the extended Duffing equation.

The flux obeys::

    phi'' + (omega_r/Q) phi' + omega(t)^2 phi - alpha Lambda(t) phi^3 = xi(t)

Trajectories carry the canonical charge ``q = C exp(omega_r t/Q) phi'`` and
the energy ``E = exp(-2 omega_r t/Q) q^2/(2C) + (C/2)(omega^2 phi^2 - 2 xi phi)``
so the closed forms in :mod:`fluxres.model` can be checked against them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import InsufficientCycles, NumericalFailure
from .model import (
    DriveSpec,
    EnergyInit,
    InitialConditions,
    ResonatorParams,
    eval_lambda,
    eval_omega,
    omega_squared,
    validate_params,
)


class OscillatorState(NamedTuple):
    t: float
    phi: float
    phidot: float


@dataclass(frozen=True)
class IntegratorConfig:
    """Settings for :func:`integrate`.

    ``damped=False`` removes the ``omega_r/Q`` friction term (and the matching
    exponential factors in ``q`` and the energy) instead of faking Q = inf.
    """

    rel_tol: float = 1e-9
    abs_tol: float = 1e-9
    max_step: Optional[float] = None
    sample_dt: float = 0.01
    damped: bool = True
    method: str = "DOP853"

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("integrator tolerances must be > 0")
        if not self.sample_dt > 0:
            raise ValueError("sample_dt must be > 0")
        if self.max_step is not None and not self.max_step > 0:
            raise ValueError("max_step must be > 0")
        if self.method not in ("RK45", "DOP853"):
            raise ValueError(f"unsupported method {self.method!r}; use RK45 or DOP853")

    def resolved_max_step(self, params: ResonatorParams, drive: DriveSpec) -> float:
        if self.max_step is not None:
            return self.max_step
        fastest = max(params.omega_r, params.omega_p, getattr(drive, "max_frequency", 0.0))
        return 2 * math.pi / (32 * fastest)


def _gamma(params: ResonatorParams, damped: bool) -> float:
    return params.damping_rate if damped else 0.0


def rhs(params: ResonatorParams, drive: DriveSpec, state: OscillatorState, damped: bool = True):
    """Time derivative ``(phi', phi'')`` of the state."""
    t, phi, phidot = state
    w2 = eval_omega(params, t) ** 2
    accel = (
        -_gamma(params, damped) * phidot
        - w2 * phi
        + params.alpha * eval_lambda(params, t) * phi**3
        + drive(params, t)
    )
    return float(phidot), float(accel)


def charge(params: ResonatorParams, t, phidot, damped: bool = True):
    return params.capacitance * np.exp(_gamma(params, damped) * np.asarray(t, dtype=float)) * phidot


def energy_a1(params: ResonatorParams, drive: DriveSpec, state: OscillatorState):
    """Energy of a state; the fields of ``state`` may be arrays.

    ``exp(-2 g t) q^2 / (2C)`` with ``q = C exp(g t) phi'`` is evaluated in
    the equivalent form ``C phi'^2 / 2`` to avoid overflow at large t.
    """
    t, phi, phidot = (np.asarray(x, dtype=float) for x in state)
    C = params.capacitance
    w2 = eval_omega(params, t) ** 2
    xi = drive(params, t)
    return (0.5 * C * phidot**2 + 0.5 * C * (w2 * phi**2 - 2 * xi * phi))[()]


def initial_state(params: ResonatorParams, init: InitialConditions, t0: float = 0.0) -> OscillatorState:
    """All-kinetic start for an energy, else the explicit state."""
    if isinstance(init, EnergyInit):
        return OscillatorState(t0, 0.0, math.sqrt(2 * init.e0 / params.capacitance))
    return OscillatorState(t0, float(init.phi0), float(init.phidot0))


def _ode_function(params: ResonatorParams, drive: DriveSpec, damped: bool):
    g = _gamma(params, damped)
    alpha = params.alpha
    # hot path: plain floats, positivity was checked by validate_params
    def f(t, y):
        phi, phidot = y
        accel = -g * phidot - float(omega_squared(params, t)) * phi + float(drive(params, t))
        if alpha:
            accel += alpha * float(eval_lambda(params, t)) * phi**3
        return (phidot, accel)

    return f


def _solve(params, drive, state, t_end, config, t_eval=None):
    sol = solve_ivp(
        _ode_function(params, drive, config.damped),
        (state.t, t_end),
        [state.phi, state.phidot],
        method=config.method,
        rtol=config.rel_tol,
        atol=config.abs_tol,
        max_step=config.resolved_max_step(params, drive),
        t_eval=t_eval,
    )
    if sol.status != 0:
        raise NumericalFailure(f"integration failed at t = {sol.t[-1]!r}: {sol.message}")
    if not np.all(np.isfinite(sol.y)):
        raise NumericalFailure("integration produced a non-finite state")
    return sol


def propagate(params: ResonatorParams, drive: DriveSpec, state: OscillatorState, t_end: float,
              config: IntegratorConfig = IntegratorConfig()) -> OscillatorState:
    """Integrate from ``state`` to ``t_end`` (which may lie in the past)."""
    lo, hi = sorted((state.t, t_end))
    validate_params(params, drive, (lo, hi))
    sol = _solve(params, drive, state, t_end, config)
    return OscillatorState(float(sol.t[-1]), float(sol.y[0, -1]), float(sol.y[1, -1]))


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled solution; arrays are read-only."""

    t: np.ndarray
    phi: np.ndarray
    phidot: np.ndarray
    q: np.ndarray
    energy: np.ndarray
    params: ResonatorParams
    drive: DriveSpec
    config: IntegratorConfig = field(default_factory=IntegratorConfig)

    def __post_init__(self):
        for name in ("t", "phi", "phidot", "q", "energy"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if len(self.t) > 1 and not np.all(np.diff(self.t) > 0):
            raise ValueError("trajectory times must be strictly increasing")

    def __len__(self):
        return len(self.t)

    def rows(self):
        return zip(self.t, self.phi, self.phidot, self.q, self.energy)

    def state_at(self, i: int) -> OscillatorState:
        return OscillatorState(float(self.t[i]), float(self.phi[i]), float(self.phidot[i]))


def sample_grid(t0: float, t1: float, dt: float) -> np.ndarray:
    n = int(math.floor((t1 - t0) / dt * (1 + 1e-12))) + 1
    return t0 + dt * np.arange(n)


def integrate(params: ResonatorParams, drive: DriveSpec, init: InitialConditions,
              config: IntegratorConfig = IntegratorConfig(), horizon: tuple[float, float] = (0.0, 50.0)) -> Trajectory:
    """Integrate the flux equation over ``horizon`` and sample it every ``sample_dt``."""
    t0, t1 = float(horizon[0]), float(horizon[1])
    if not t1 > t0:
        raise ValueError(f"horizon must satisfy t0 < t1, got {horizon!r}")
    validate_params(params, drive, (t0, t1))
    state = initial_state(params, init, t0)
    grid = sample_grid(t0, t1, config.sample_dt)
    sol = _solve(params, drive, state, grid[-1], config, t_eval=grid)
    phi, phidot = sol.y
    energy = energy_a1(params, drive, OscillatorState(grid, phi, phidot))
    q = charge(params, grid, phidot, config.damped)
    return Trajectory(grid, phi, phidot, q, energy, params, drive, config)


# -- cycles and action ------------------------------------------------------


class Cycle(NamedTuple):
    t_start: float
    t_end: float

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.t_start + self.t_end)

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start


def upward_crossings(t: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Times where phi passes from <= 0 to > 0, linearly interpolated."""
    idx = np.flatnonzero((phi[:-1] <= 0) & (phi[1:] > 0))
    frac = -phi[idx] / (phi[idx + 1] - phi[idx])
    return t[idx] + frac * (t[idx + 1] - t[idx])


def find_cycles(trajectory: Trajectory) -> list[Cycle]:
    tc = upward_crossings(trajectory.t, trajectory.phi)
    return [Cycle(float(a), float(b)) for a, b in zip(tc[:-1], tc[1:])]


def _get_cycle(trajectory: Trajectory, cycle_index: int) -> Cycle:
    cycles = find_cycles(trajectory)
    if cycle_index < 0 or cycle_index >= len(cycles):
        raise InsufficientCycles(
            f"cycle {cycle_index} requested but the trajectory has {len(cycles) + 1 if cycles else 'fewer than 2'} "
            "upward zero-crossings of phi"
        )
    return cycles[cycle_index]


def integrate_over(t: np.ndarray, y: np.ndarray, a: float, b: float) -> float:
    """Trapezoid of samples ``y(t)`` on ``[a, b]`` with interpolated endpoints."""
    inside = (t > a) & (t < b)
    ts = np.concatenate(([a], t[inside], [b]))
    ys = np.concatenate(([np.interp(a, t, y)], y[inside], [np.interp(b, t, y)]))
    return float(np.trapezoid(ys, ts))


def cycle_mean(trajectory: Trajectory, values: np.ndarray, cycle: Cycle) -> float:
    return integrate_over(trajectory.t, values, *cycle) / cycle.duration


def compute_action(trajectory: Trajectory, cycle_index: int = 0) -> float:
    """Action ``J = closed integral of q dphi`` over one oscillation cycle."""
    cycle = _get_cycle(trajectory, cycle_index)
    return integrate_over(trajectory.t, trajectory.q * trajectory.phidot, *cycle)


def action_energy_identity_check(trajectory: Trajectory, cycle_index: int = 0) -> float:
    """Relative gap between the measured action and the one predicted from the cycle energy.

    The prediction is ``2 pi exp(g t_c)/omega(t_c) * (E_cyc + C xi(t_c)^2/(2 omega(t_c)^2))``
    with ``t_c`` the cycle midpoint and ``E_cyc`` the cycle-averaged energy.
    """
    params, drive = trajectory.params, trajectory.drive
    if params.alpha != 0:
        raise ValueError("the action-energy relation holds only for alpha = 0")
    cycle = _get_cycle(trajectory, cycle_index)
    action = integrate_over(trajectory.t, trajectory.q * trajectory.phidot, *cycle)
    tc = cycle.midpoint
    w = float(eval_omega(params, tc))
    xi = float(drive(params, tc))
    e_cyc = cycle_mean(trajectory, trajectory.energy, cycle)
    g = _gamma(params, trajectory.config.damped)
    predicted = 2 * math.pi * math.exp(g * tc) / w * (e_cyc + params.capacitance * xi**2 / (2 * w**2))
    return abs(action - predicted) / abs(action)

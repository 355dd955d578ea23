"""Closed-form expressions for the pumped, damped flux-qubit resonator.

Everything here is a pure function of its arguments and works on scalars or
numpy arrays of times.  Quantities are dimensionless simulation units
(``omega_r = 0.5``, ``C = 1`` and so on).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import NonPositiveFrequencySquared

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class ResonatorParams:
    """Circuit and pump constants.

    Attributes
    ----------
    omega_r : float
        Resonant angular frequency.
    q_factor : float
        Quality factor; the damping rate of the flux is ``omega_r / q_factor``.
    epsilon : float
        Pump strength (adds to ``omega_r**2``).
    omega_p : float
        Pump angular frequency.
    beta : float
        Dimensionless pump-induced frequency shift.
    alpha : float
        Duffing coefficient.  Only the ODE uses it; the closed forms assume 0.
    lambda_corr : float
        Pump modulation of the Duffing term.
    capacitance : float
        Resonator capacitance C.
    """

    omega_r: float = 0.5
    q_factor: float = 5.0
    epsilon: float = 0.0
    omega_p: float = 1.0
    beta: float = 0.0
    alpha: float = 0.0
    lambda_corr: float = 0.0
    capacitance: float = 1.0

    def __post_init__(self):
        for name in ("omega_r", "q_factor", "omega_p", "capacitance"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be > 0, got {value!r}")
        for name in ("epsilon", "beta", "alpha", "lambda_corr"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def damping_rate(self) -> float:
        return self.omega_r / self.q_factor

    @property
    def pump_shift(self) -> float:
        """Coefficient ``beta eps^2 Q / (2 omega_r omega_p)`` of the (1 - cos 2 w_p t) term."""
        if self.epsilon == 0 or self.beta == 0:
            return 0.0
        return self.beta * self.epsilon**2 * self.q_factor / (2 * self.omega_r * self.omega_p)

    @property
    def pump_period(self) -> float:
        return 2 * math.pi / self.omega_p

    def replace(self, **changes) -> "ResonatorParams":
        from dataclasses import replace

        return replace(self, **changes)


# -- drives -----------------------------------------------------------------


@dataclass(frozen=True)
class ZeroDrive:
    kind = "zero"

    def __call__(self, params: ResonatorParams, t: ArrayLike) -> ArrayLike:
        return np.zeros_like(np.asarray(t, dtype=float))[()]

    @property
    def max_frequency(self) -> float:
        return 0.0


@dataclass(frozen=True)
class SinusoidDrive:
    """``xi0 * cos(omega_d t + theta)``."""

    xi0: float
    omega_d: float
    theta: float = 0.0
    kind = "sinusoid"

    def __post_init__(self):
        if not self.omega_d >= 0:
            raise ValueError(f"omega_d must be >= 0, got {self.omega_d!r}")

    def __call__(self, params, t):
        return self.xi0 * np.cos(self.omega_d * np.asarray(t, dtype=float) + self.theta)[()]

    @property
    def max_frequency(self) -> float:
        return self.omega_d


@dataclass(frozen=True)
class PowerDrive:
    """``xi0 * omega(t)**exponent``; exponent 3/2 is the adiabatic optimum."""

    xi0: float
    exponent: float = 1.5
    kind = "power"

    def __call__(self, params, t):
        return self.xi0 * eval_omega(params, t) ** self.exponent

    @property
    def max_frequency(self) -> float:
        return 0.0


@dataclass(frozen=True)
class TabulatedDrive:
    """Piecewise-linear signal through ``(t, xi)`` samples, clamped at the ends."""

    times: tuple
    values: tuple
    kind = "tabulated"

    def __post_init__(self):
        times = tuple(float(x) for x in self.times)
        values = tuple(float(x) for x in self.values)
        if len(times) < 2 or len(times) != len(values):
            raise ValueError("tabulated drive needs >= 2 (t, xi) pairs")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("tabulated drive times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_pairs(cls, pairs) -> "TabulatedDrive":
        pairs = list(pairs)
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    def __call__(self, params, t):
        return np.interp(np.asarray(t, dtype=float), self.times, self.values)[()]

    @property
    def max_frequency(self) -> float:
        return 0.0


DriveSpec = Union[ZeroDrive, SinusoidDrive, PowerDrive, TabulatedDrive]


@dataclass(frozen=True)
class EnergyInit:
    """Start from a given energy; realised as ``phi = 0``, ``phidot = sqrt(2 E0 / C)``."""

    e0: float
    kind = "energy"

    def __post_init__(self):
        if not self.e0 >= 0:
            raise ValueError(f"initial energy must be >= 0, got {self.e0!r}")


@dataclass(frozen=True)
class StateInit:
    phi0: float
    phidot0: float
    kind = "state"


InitialConditions = Union[EnergyInit, StateInit]


# -- closed forms -----------------------------------------------------------


def omega_squared(params: ResonatorParams, t: ArrayLike) -> ArrayLike:
    """The bracket under the square root of omega(t); may be <= 0."""
    t = np.asarray(t, dtype=float)
    wp = params.omega_p
    return (
        params.omega_r**2
        + params.epsilon * np.cos(wp * t)
        - params.pump_shift * (1.0 - np.cos(2 * wp * t))
    )[()]


def _raise_if_nonpositive(t, w2):
    bad = np.asarray(w2) <= 0
    if np.any(bad):
        t_arr = np.broadcast_to(np.asarray(t, dtype=float), np.shape(bad))
        i = np.flatnonzero(bad)[0]
        raise NonPositiveFrequencySquared(np.ravel(t_arr)[i], np.ravel(w2)[i])


def eval_omega(params: ResonatorParams, t: ArrayLike) -> ArrayLike:
    """Pumped angular frequency omega(t).

    Raises
    ------
    NonPositiveFrequencySquared
        If omega(t)**2 <= 0 at any requested time.
    """
    w2 = omega_squared(params, t)
    _raise_if_nonpositive(t, w2)
    return np.sqrt(w2)


def eval_lambda(params: ResonatorParams, t: ArrayLike) -> ArrayLike:
    """Time modulation of the Duffing coefficient."""
    t = np.asarray(t, dtype=float)
    if params.lambda_corr == 0 or params.epsilon == 0:
        return np.ones_like(t)[()]
    coef = 3 * params.lambda_corr * params.q_factor * params.epsilon / (2 * params.omega_r * params.omega_p)
    return (1.0 - coef * np.cos(params.omega_p * t))[()]


def eval_drive(drive: DriveSpec, params: ResonatorParams, t: ArrayLike) -> ArrayLike:
    return drive(params, t)


def omega_bracket_bounds(params: ResonatorParams) -> tuple[float, float]:
    """Loose bounds on omega(t)**2 from the extrema of each bracket term taken separately."""
    shift = -2 * params.pump_shift  # range of -b (1 - cos) is [min(0, -2b), max(0, -2b)]
    lo = params.omega_r**2 - abs(params.epsilon) + min(0.0, shift)
    hi = params.omega_r**2 + abs(params.epsilon) + max(0.0, shift)
    return lo, hi


def initial_energy(params: ResonatorParams, drive: DriveSpec, init: InitialConditions) -> float:
    if isinstance(init, EnergyInit):
        return float(init.e0)
    C = params.capacitance
    w2 = omega_squared(params, 0.0)
    xi = drive(params, 0.0)
    return float(0.5 * C * init.phidot0**2 + 0.5 * C * (w2 * init.phi0**2 - 2 * xi * init.phi0))


def _initial_constant(params, drive, init):
    # E(0) + C xi(0)^2 / (2 omega(0)^2); conserved (times e^{wr t/Q}/omega) in the adiabatic limit
    w0 = eval_omega(params, 0.0)
    xi0 = drive(params, 0.0)
    e0 = initial_energy(params, drive, init)
    return w0, e0 + params.capacitance * xi0**2 / (2 * w0**2)


def closed_form_energy(params: ResonatorParams, drive: DriveSpec, init: InitialConditions, t: ArrayLike) -> ArrayLike:
    """Adiabatic energy of the linear (alpha = 0) resonator.

    ``E(t) = exp(-omega_r t/Q) (omega(t)/omega(0)) (E0 + C xi(0)^2 / (2 omega(0)^2))
    - C xi(t)^2 / (2 omega(t)^2)``
    """
    w0, k0 = _initial_constant(params, drive, init)
    w = eval_omega(params, t)
    xi = drive(params, t)
    decay = np.exp(-params.damping_rate * np.asarray(t, dtype=float))
    return (decay * (w / w0) * k0 - params.capacitance * xi**2 / (2 * w**2))[()]


def closed_form_invariant(params: ResonatorParams, drive: DriveSpec, init: InitialConditions, t: ArrayLike) -> ArrayLike:
    """Rayleigh-Lorentz invariant ``I(t) = E(t) / omega(t)`` in closed form."""
    w0, k0 = _initial_constant(params, drive, init)
    w = eval_omega(params, t)
    xi = drive(params, t)
    decay = np.exp(-params.damping_rate * np.asarray(t, dtype=float))
    return (decay * k0 / w0 - params.capacitance * xi**2 / (2 * w**3))[()]


# -- validation -------------------------------------------------------------


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    method: str  # "bound" or "sampling"
    horizon: tuple[float, float]
    omega_sq_lower_bound: float
    min_omega_sq: float
    t_min: float
    notes: tuple[str, ...] = field(default_factory=tuple)

    def as_dict(self) -> dict:
        return {
            "valid": self.valid,
            "method": self.method,
            "horizon": list(self.horizon),
            "omega_sq_lower_bound": self.omega_sq_lower_bound,
            "min_omega_sq": self.min_omega_sq,
            "t_min": self.t_min,
            "notes": list(self.notes),
        }


class InvalidParameters(NonPositiveFrequencySquared):
    """Raised by :func:`validate_params`; carries the full report."""

    def __init__(self, report: ValidationReport):
        self.report = report
        super().__init__(
            report.t_min,
            report.min_omega_sq,
            "omega^2(t) must stay > 0: bracket lower bound "
            f"omega_r^2 - |eps| - beta eps^2 Q/(omega_r omega_p) = {report.omega_sq_lower_bound!r}, "
            f"min sampled omega^2 = {report.min_omega_sq!r} at t = {report.t_min!r}",
        )


SAMPLES_PER_PUMP_PERIOD = 64


def sampled_min_omega_sq(params: ResonatorParams, horizon: tuple[float, float], per_period: int = SAMPLES_PER_PUMP_PERIOD):
    """Minimum of omega(t)**2 over the horizon.

    omega**2 is periodic in the pump period, so at most one period is scanned
    densely; the best sample is then polished with a bounded scalar search.
    """
    t0, t1 = float(horizon[0]), float(horizon[1])
    span = min(t1 - t0, params.pump_period)
    n = max(int(math.ceil(per_period * span / params.pump_period)), per_period) + 1
    ts = np.linspace(t0, t0 + span, n)
    w2 = omega_squared(params, ts)
    i = int(np.argmin(w2))
    t_best, w_best = float(ts[i]), float(w2[i])
    if n > 2 and span > 0:
        lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, n - 1)]
        res = minimize_scalar(lambda s: float(omega_squared(params, s)), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12 * max(1.0, abs(hi))})
        if res.fun < w_best:
            t_best, w_best = float(res.x), float(res.fun)
    return w_best, t_best


def validate_params(params: ResonatorParams, drive: DriveSpec, horizon: tuple[float, float]) -> ValidationReport:
    """Check that omega(t)**2 > 0 everywhere on ``horizon``.

    The cheap bracket bound settles most cases; otherwise dense sampling
    decides.  Raises :class:`InvalidParameters` (a NonPositiveFrequencySquared)
    when the regime is not oscillatory.
    """
    t0, t1 = float(horizon[0]), float(horizon[1])
    if not t1 >= t0:
        raise ValueError(f"horizon must satisfy t0 <= t1, got {horizon!r}")
    bound = omega_bracket_bounds(params)[0]
    min_w2, t_min = sampled_min_omega_sq(params, (t0, t1))
    method = "bound" if bound > 0 else "sampling"
    valid = bound > 0 or min_w2 > 0
    notes = []
    if valid:
        xi = drive(params, np.linspace(t0, t1, 257))
        if not np.all(np.isfinite(xi)):
            valid = False
            notes.append("drive is not finite on the horizon")
    report = ValidationReport(valid, method, (t0, t1), float(bound), float(min_w2), float(t_min), tuple(notes))
    if not valid:
        raise InvalidParameters(report)
    return report

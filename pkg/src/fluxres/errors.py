"""Exception types raised across the package."""

from __future__ import annotations


class FluxResError(Exception):
    """Base class for all package errors."""


class NonPositiveFrequencySquared(FluxResError, ValueError):
    """The bracket under the square root of omega(t) is <= 0."""

    def __init__(self, t: float, omega_sq: float, message: str | None = None):
        self.t = float(t)
        self.omega_sq = float(omega_sq)
        if message is None:
            message = (
                f"omega^2(t) = {self.omega_sq!r} <= 0 at t = {self.t!r}; "
                "the pump parameters leave the oscillatory regime"
            )
        super().__init__(message)


class NumericalFailure(FluxResError, RuntimeError):
    """ODE integration failed (step underflow or non-finite state)."""


class InsufficientCycles(FluxResError, ValueError):
    """Too few upward zero-crossings of phi for the requested cycle."""


class EmptyWindow(FluxResError, ValueError):
    """Fewer than two samples fall inside a drift window."""


class FlatObjective(FluxResError, ValueError):
    """The drift objective does not vary over the search interval."""


class ConfigError(FluxResError, ValueError):
    """A run configuration is malformed."""

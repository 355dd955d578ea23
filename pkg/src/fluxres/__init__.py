"""Rayleigh-Lorentz invariant toolkit for pumped, damped flux-qubit resonators."""

from .dynamics import (
    IntegratorConfig,
    OscillatorState,
    Trajectory,
    action_energy_identity_check,
    compute_action,
    energy_a1,
    find_cycles,
    integrate,
    propagate,
    rhs,
)
from .errors import (
    ConfigError,
    EmptyWindow,
    FlatObjective,
    InsufficientCycles,
    NonPositiveFrequencySquared,
    NumericalFailure,
)
from .experiments import SweepSpec, run_convergence_study, run_sweep
from .invariant import DriftMetrics, InvariantSeries, drift_metrics, invariant_series_closed_form, invariant_series_numerical
from .model import (
    EnergyInit,
    PowerDrive,
    ResonatorParams,
    SinusoidDrive,
    StateInit,
    TabulatedDrive,
    ZeroDrive,
    closed_form_energy,
    closed_form_invariant,
    eval_drive,
    eval_lambda,
    eval_omega,
    validate_params,
)
from .optimize import OptimizationResult, drift_objective, find_optimal_exponent

__version__ = "0.1.0"

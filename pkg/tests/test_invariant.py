import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fluxres.dynamics import IntegratorConfig, find_cycles, integrate
from fluxres.errors import EmptyWindow, InsufficientCycles
from fluxres.invariant import (
    InvariantSeries,
    default_window,
    drift_metrics,
    invariant_series_closed_form,
    invariant_series_numerical,
    late_window,
)
from fluxres.model import EnergyInit, PowerDrive, ResonatorParams, SinusoidDrive, StateInit, ZeroDrive, closed_form_invariant

FIG1 = ResonatorParams(omega_r=0.5, q_factor=5, epsilon=0.1, omega_p=1, beta=1)
FIG3 = ResonatorParams(omega_r=2, q_factor=10, epsilon=0.5, omega_p=2, beta=0.5)


def test_closed_form_series_decay():
    p = ResonatorParams(omega_r=0.5, q_factor=5, epsilon=0.0)
    s = invariant_series_closed_form(p, ZeroDrive(), EnergyInit(1.0), (0.0, 10.0), 10.0)
    np.testing.assert_array_equal(s.t, [0.0, 10.0])
    np.testing.assert_allclose(s.values, [2.0, 2 * math.exp(-1)], rtol=1e-14)
    assert s.source == "closed_form"


def test_closed_form_series_starts_at_e0_over_omega0():
    s = invariant_series_closed_form(FIG1, SinusoidDrive(0.2, 1.0), EnergyInit(1.0), (0.0, 10.0), 0.01)
    assert s.values[0] == pytest.approx(1 / math.sqrt(0.35), rel=1e-14)


def test_numerical_series_sho_is_constant():
    p = ResonatorParams(omega_r=1.0, epsilon=0.0)
    traj = integrate(p, ZeroDrive(), StateInit(0.0, 1.0), IntegratorConfig(damped=False, sample_dt=0.001), (0.0, 30.0))
    s = invariant_series_numerical(traj)
    assert s.source == "numerical"
    np.testing.assert_allclose(s.values, 0.5, rtol=1e-6)


def test_numerical_series_damped_decay():
    p = ResonatorParams(omega_r=0.5, q_factor=5, epsilon=0.0)
    traj = integrate(p, ZeroDrive(), EnergyInit(1.0), IntegratorConfig(), (0.0, 60.0))
    s = invariant_series_numerical(traj)
    g = p.damping_rate
    cycles = find_cycles(traj)
    # the cycle average of exp(-g t) is what the cycle-averaged energy follows
    expected = [(math.exp(-g * c.t_start) - math.exp(-g * c.t_end)) / (g * c.duration) / 0.5 for c in cycles]
    np.testing.assert_allclose(s.values, expected, rtol=1e-4)


def test_numerical_series_tracks_closed_form_when_slow():
    p = ResonatorParams(omega_r=0.5, q_factor=5, epsilon=0.1 / 16, omega_p=1 / 16, beta=1)
    traj = integrate(p, ZeroDrive(), EnergyInit(1.0), IntegratorConfig(), (0.0, 60.0))
    s = invariant_series_numerical(traj)
    for c, value in zip(find_cycles(traj), s.values):
        ts = np.linspace(c.t_start, c.t_end, 2001)
        energy = closed_form_invariant(p, ZeroDrive(), EnergyInit(1.0), ts) * np.sqrt(
            0.25 + p.epsilon * np.cos(p.omega_p * ts) - p.pump_shift * (1 - np.cos(2 * p.omega_p * ts)))
        ref = np.trapezoid(energy, ts) / c.duration / np.sqrt(0.25 + p.epsilon * np.cos(p.omega_p * c.midpoint)
                                                              - p.pump_shift * (1 - np.cos(2 * p.omega_p * c.midpoint)))
        assert value == pytest.approx(ref, rel=0.05)


def test_numerical_series_needs_cycles():
    p = ResonatorParams(omega_r=1.0, epsilon=0.0)
    traj = integrate(p, ZeroDrive(), StateInit(0.0, 1.0), IntegratorConfig(damped=False), (0.0, 8.0))
    with pytest.raises(InsufficientCycles):
        invariant_series_numerical(traj)


def test_drift_metrics_examples():
    flat = drift_metrics(InvariantSeries([0, 1, 2], [1.0, 1.0, 1.0], "closed_form"), (0, 2))
    assert (flat.peak_to_peak, flat.rms_dev) == (0.0, 0.0)
    m = drift_metrics(InvariantSeries([0, 1, 2], [1.0, 2.0, 3.0], "closed_form"), (0, 2))
    assert m.mean == 2.0
    assert m.peak_to_peak == 2.0
    assert m.rms_dev == pytest.approx(math.sqrt(2 / 3), rel=1e-15)
    assert m.rms_dev == pytest.approx(0.81650, abs=1e-5)


def test_drift_metrics_empty_window():
    s = InvariantSeries([0, 1, 2], [1.0, 2.0, 3.0], "closed_form")
    with pytest.raises(EmptyWindow):
        drift_metrics(s, (1.5, 1.9))
    with pytest.raises(EmptyWindow):
        drift_metrics(s, (2.0, 5.0))


@given(st.floats(-1e6, 1e6), st.integers(2, 50))
def test_constant_series_has_zero_drift(c, n):
    m = drift_metrics(InvariantSeries(np.arange(n), np.full(n, c), "numerical"), (0, n))
    assert (m.peak_to_peak, m.rms_dev) == (0.0, 0.0)


@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=40))
def test_drift_metric_ordering(values):
    m = drift_metrics(InvariantSeries(np.arange(len(values)), values, "numerical"), (0, len(values)))
    assert 0.0 <= m.rms_dev <= m.peak_to_peak


def test_series_rejects_unordered_times():
    with pytest.raises(ValueError):
        InvariantSeries([0, 2, 1], [1, 1, 1], "closed_form")


def test_fig2_rms_grows_with_amplitude():
    p = FIG1.replace(omega_p=10.0)
    rms = [
        drift_metrics(invariant_series_closed_form(p, SinusoidDrive(x, 10.0), EnergyInit(1.0), (0, 10), 0.0005), (0, 10)).rms_dev
        for x in (0.2, 0.5, 1.0)
    ]
    assert rms[0] < rms[1] < rms[2]


def test_late_window_constancy_only_for_optimal_exponent():
    window = late_window(FIG3)
    assert window == (100.0, 120.0)
    ptp = {}
    for p in (1.5, 2.5, 3.5):
        s = invariant_series_closed_form(FIG3, PowerDrive(0.4, p), EnergyInit(2.0), window, 0.005)
        ptp[p] = drift_metrics(s, window).peak_to_peak
    assert ptp[1.5] < 1e-6
    assert ptp[2.5] > 1e-2 and ptp[3.5] > 1e-2


def test_default_window():
    assert default_window(FIG1) == (50.0, 100.0)

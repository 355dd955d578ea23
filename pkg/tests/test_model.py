import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fluxres.errors import NonPositiveFrequencySquared
from fluxres.model import (
    EnergyInit,
    InvalidParameters,
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
    omega_bracket_bounds,
    omega_squared,
    validate_params,
)

FIG1 = ResonatorParams(omega_r=0.5, q_factor=5, epsilon=0.1, omega_p=1, beta=1, capacitance=1)
FIG1_DRIVE = SinusoidDrive(xi0=0.2, omega_d=1, theta=0)


def test_omega_fig1_at_zero():
    assert eval_omega(FIG1, 0.0) == pytest.approx(math.sqrt(0.35), rel=1e-15)
    assert eval_omega(FIG1, 0.0) == pytest.approx(0.591608, abs=1e-6)


def test_omega_fig1_half_pump_period():
    assert eval_omega(FIG1, math.pi / FIG1.omega_p) == pytest.approx(math.sqrt(0.15), rel=1e-14)


@pytest.mark.parametrize("beta", [-2.0, 0.0, 1.0, 7.5])
def test_omega_unpumped_is_resonant(beta):
    p = ResonatorParams(omega_r=0.7, epsilon=0.0, beta=beta)
    t = np.linspace(0, 30, 101)
    np.testing.assert_array_equal(eval_omega(p, t), np.full_like(t, 0.7))


def test_omega_raises_outside_oscillatory_regime():
    p = ResonatorParams(omega_r=1, q_factor=10, epsilon=0.5, omega_p=1, beta=0.5)
    with pytest.raises(NonPositiveFrequencySquared) as info:
        eval_omega(p, np.linspace(0, 2 * math.pi, 200))
    assert info.value.omega_sq <= 0


def test_lambda():
    assert eval_lambda(FIG1, 3.3) == 1.0  # lambda_corr = 0
    p = FIG1.replace(lambda_corr=1.0)
    assert eval_lambda(p, 0.0) == pytest.approx(-0.5, rel=1e-15)
    assert eval_lambda(p, math.pi / (2 * p.omega_p)) == pytest.approx(1.0, abs=1e-15)


def test_drives():
    assert eval_drive(FIG1_DRIVE, FIG1, 0.0) == 0.2
    assert eval_drive(ZeroDrive(), FIG1, 12.0) == 0.0
    flat = ResonatorParams(omega_r=1.0, epsilon=0.0)
    np.testing.assert_allclose(eval_drive(PowerDrive(0.4, 1.5), flat, np.linspace(0, 9, 7)), 0.4, rtol=0, atol=0)


def test_tabulated_drive_interpolates_and_clamps():
    d = TabulatedDrive.from_pairs([(0.0, 1.0), (2.0, 3.0), (4.0, -1.0)])
    assert d(FIG1, 1.0) == 2.0
    assert d(FIG1, 3.0) == 1.0
    assert d(FIG1, -5.0) == 1.0
    assert d(FIG1, 50.0) == -1.0
    with pytest.raises(ValueError):
        TabulatedDrive.from_pairs([(0.0, 1.0)])
    with pytest.raises(ValueError):
        TabulatedDrive.from_pairs([(0.0, 1.0), (0.0, 2.0)])


def test_param_invariants():
    with pytest.raises(ValueError):
        ResonatorParams(omega_r=0.0)
    with pytest.raises(ValueError):
        ResonatorParams(q_factor=-1.0)
    with pytest.raises(ValueError):
        SinusoidDrive(0.1, -1.0)
    with pytest.raises(ValueError):
        EnergyInit(-0.1)


# closed forms


def test_energy_at_zero_is_initial_energy():
    assert closed_form_energy(FIG1, FIG1_DRIVE, EnergyInit(1.0), 0.0) == pytest.approx(1.0, rel=1e-15)


def test_energy_undriven_unpumped_decay():
    p = ResonatorParams(omega_r=0.5, q_factor=5, epsilon=0.0)
    assert closed_form_energy(p, ZeroDrive(), EnergyInit(1.0), 10.0) == pytest.approx(math.exp(-1), rel=1e-14)
    assert closed_form_invariant(p, ZeroDrive(), EnergyInit(1.0), 10.0) == pytest.approx(2 * math.exp(-1), rel=1e-14)


def test_energy_fig1_golden():
    # mpmath transcription of the energy formula, 30 digits
    assert closed_form_energy(FIG1, FIG1_DRIVE, EnergyInit(1.0), math.pi) == pytest.approx(0.3721509439017888, rel=1e-13)
    assert closed_form_invariant(FIG1, FIG1_DRIVE, EnergyInit(1.0), math.pi) == pytest.approx(0.9608896053379991, rel=1e-13)


def test_invariant_at_zero_fig1():
    assert closed_form_invariant(FIG1, FIG1_DRIVE, EnergyInit(1.0), 0.0) == pytest.approx(1 / math.sqrt(0.35), rel=1e-14)
    assert 1 / math.sqrt(0.35) == pytest.approx(1.690309, abs=1e-6)


def test_invariant_late_limit_optimal_power_drive():
    p = ResonatorParams(omega_r=2, q_factor=10, epsilon=0.5, omega_p=2, beta=0.5)
    late = closed_form_invariant(p, PowerDrive(0.4, 1.5), EnergyInit(2.0), np.linspace(400, 420, 50))
    np.testing.assert_allclose(late, -0.08, rtol=1e-12)


def test_state_init_uses_state_energy():
    e_state = closed_form_energy(FIG1, FIG1_DRIVE, StateInit(1.0, 1.0), 0.0)
    assert e_state == pytest.approx(0.5 + 0.5 * (0.35 - 0.4), rel=1e-14)


params_strategy = st.builds(
    ResonatorParams,
    omega_r=st.floats(0.2, 3.0),
    q_factor=st.floats(1.0, 50.0),
    epsilon=st.floats(-0.3, 0.3),
    omega_p=st.floats(0.1, 20.0),
    beta=st.floats(-1.0, 1.0),
    capacitance=st.floats(0.2, 5.0),
)
drive_strategy = st.one_of(
    st.just(ZeroDrive()),
    st.builds(SinusoidDrive, xi0=st.floats(-1, 1), omega_d=st.floats(0, 20), theta=st.floats(-3.2, 3.2)),
    st.builds(PowerDrive, xi0=st.floats(-1, 1), exponent=st.floats(-3, 4)),
)


def _oscillatory(p):
    return omega_bracket_bounds(p)[0] > 0


@settings(max_examples=200, deadline=None)
@given(params_strategy, drive_strategy, st.floats(0.0, 1.0), st.floats(0.0, 40.0))
def test_invariant_is_energy_over_omega(p, drive, e0, t):
    if not _oscillatory(p):
        return
    init = EnergyInit(e0)
    e = closed_form_energy(p, drive, init, t)
    i = closed_form_invariant(p, drive, init, t)
    w = eval_omega(p, t)
    assert i * w == pytest.approx(e, rel=1e-12, abs=1e-12 * (abs(e0) + 1))
    assert closed_form_energy(p, drive, init, 0.0) == pytest.approx(e0, rel=1e-12, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(params_strategy, st.floats(0.0, 50.0))
def test_zero_drive_periodicity(p, t):
    if not _oscillatory(p):
        return
    init = EnergyInit(1.0)
    T = p.pump_period
    assert eval_omega(p, t + T) == pytest.approx(eval_omega(p, t), rel=1e-9)
    assert eval_lambda(p.replace(lambda_corr=0.3), t + T) == pytest.approx(eval_lambda(p.replace(lambda_corr=0.3), t), rel=1e-9, abs=1e-9)
    scaled = lambda s: closed_form_energy(p, ZeroDrive(), init, s) * math.exp(p.damping_rate * s)
    assert scaled(t + T) == pytest.approx(scaled(t), rel=1e-9)


@settings(max_examples=200, deadline=None)
@given(params_strategy, st.floats(-100.0, 100.0))
def test_omega_within_bracket_bounds(p, t):
    lo, hi = omega_bracket_bounds(p)
    w2 = omega_squared(p, t)
    assert lo - 1e-12 <= w2 <= hi + 1e-12
    if lo > 0:
        assert math.sqrt(lo) - 1e-12 <= eval_omega(p, t) <= math.sqrt(hi) + 1e-12


# validation


def test_validate_fig1():
    report = validate_params(FIG1, FIG1_DRIVE, (0.0, 50.0))
    assert report.valid and report.method == "bound"
    assert report.omega_sq_lower_bound == pytest.approx(0.05, rel=1e-12)
    # quadratic in c = cos(w_p t): 0.15 + 0.1 c + 0.1 c^2, minimum at c = -1/2
    assert report.min_omega_sq == pytest.approx(0.125, rel=1e-9)
    assert report.min_omega_sq > 0


def test_validate_rejects_negative_bracket():
    p = ResonatorParams(omega_r=1, q_factor=10, epsilon=0.5, omega_p=1, beta=0.5)
    with pytest.raises(InvalidParameters) as info:
        validate_params(p, ZeroDrive(), (0.0, 50.0))
    report = info.value.report
    assert not report.valid
    assert report.omega_sq_lower_bound == pytest.approx(-0.75, abs=1e-12)
    # -0.25 + 0.5 c + 1.25 c^2 is smallest at c = -0.2
    assert report.min_omega_sq == pytest.approx(-0.3, abs=1e-9)
    assert omega_squared(p, report.t_min) <= 0
    assert isinstance(info.value, NonPositiveFrequencySquared)


def test_validate_sampling_path_accepts_when_bound_is_loose():
    # bound 1 - 0.5 - 0.6 < 0 but 0.4 + 0.5c + 0.6c^2 stays >= 0.2958 > 0
    p = ResonatorParams(omega_r=1, q_factor=12, epsilon=0.5, omega_p=1, beta=0.2)
    report = validate_params(p, ZeroDrive(), (0, 20))
    assert report.method == "sampling"
    assert report.min_omega_sq == pytest.approx(0.4 - 0.25 / 2.4, rel=1e-9)


def test_validate_unpumped_always_valid():
    report = validate_params(ResonatorParams(omega_r=0.3, epsilon=0.0, beta=100.0), ZeroDrive(), (0, 1e4))
    assert report.valid

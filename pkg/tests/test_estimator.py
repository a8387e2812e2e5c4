"""Instantaneous wrench estimation, window fits, and horizon forecasting."""

import numpy as np
import pytest

from quadmpc.dynamics import RobotParams, State, build_discrete_model, predict_next_state
from quadmpc.errors import (
    EmptyWindow,
    InsufficientWindow,
    NonMonotonicTime,
    RankDeficient,
)
from quadmpc.estimator import (
    DisturbancePolicy,
    EstimatorConfig,
    PeriodicModel,
    ResidualHistory,
    estimate_instant,
    fit_periodic,
    fit_static,
    forecast,
)


def _random_transition(rng, params, n_feet=4):
    contacts = [(True, rng.uniform(-0.3, 0.3, size=3)) for _ in range(n_feet)]
    model = build_discrete_model(params, rng.uniform(-0.2, 0.2, size=3), contacts, dt=0.03)
    x = State.from_vector(rng.standard_normal(12) * 0.3)
    u = rng.uniform(-30.0, 60.0, size=3 * n_feet)
    xi = rng.uniform(-20.0, 20.0, size=6)
    x_next = predict_next_state(model, x, u, xi)
    return model, x, u, xi, x_next


def test_zero_residual_gives_zero_estimate(params):
    rng = np.random.default_rng(1)
    model, x, u, _, _ = _random_transition(rng, params)
    x_next = predict_next_state(model, x, u)
    est = estimate_instant(x_next, x, u, model)
    assert np.max(np.abs(est.to_vector())) < 1e-12


def test_injected_wrench_recovered(params):
    model = build_discrete_model(
        params, np.zeros(3), [(True, np.asarray(r)) for r in params.hip_offsets], dt=0.03
    )
    x = State(np.zeros(3), np.array([0.0, 0.0, 0.28]), np.zeros(3), np.zeros(3))
    u = np.tile([0.0, 0.0, params.mass * 9.81 / 4], 4)
    xi = np.array([5.0, 0.0, 0.0, 0.0, 0.2, 0.0])
    x_next = predict_next_state(model, x, u, xi)
    est = estimate_instant(x_next, x, u, model)
    assert np.max(np.abs(est.to_vector() - xi)) < 1e-9


def test_weight_choice_is_irrelevant_on_consistent_data(params):
    rng = np.random.default_rng(2)
    model, x, u, xi, x_next = _random_transition(rng, params)
    identity = estimate_instant(x_next, x, u, model).to_vector()
    weighted = estimate_instant(
        x_next, x, u, model, weight=np.diag([1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
    ).to_vector()
    assert np.max(np.abs(identity - weighted)) < 1e-9
    assert np.max(np.abs(identity - xi)) < 1e-9


def test_singular_weight_detected(params):
    rng = np.random.default_rng(3)
    model, x, u, _, x_next = _random_transition(rng, params)
    # zero weight on the angular rows kills the torque columns
    with pytest.raises(RankDeficient):
        estimate_instant(x_next, x, u, model, weight=np.diag([1, 1, 1, 0, 0, 0]))


def test_estimate_checks_force_dimension(params):
    rng = np.random.default_rng(4)
    model, x, u, _, x_next = _random_transition(rng, params)
    from quadmpc.errors import DimensionMismatch

    with pytest.raises(DimensionMismatch):
        estimate_instant(x_next, x, u[:-3], model)


# ---------------------------------------------------------------------------
# residual history


def test_history_evicts_oldest():
    hist = ResidualHistory(window=5)
    for i in range(7):
        hist.push(0.03 * i, np.full(6, float(i)))
    assert len(hist) == 5
    t, xi = hist.arrays()
    assert np.allclose(t, 0.03 * np.arange(2, 7))
    assert np.allclose(xi[:, 0], np.arange(2.0, 7.0))


def test_history_rejects_non_monotonic_time():
    hist = ResidualHistory(window=5)
    hist.push(0.0, np.zeros(6))
    with pytest.raises(NonMonotonicTime):
        hist.push(0.0, np.zeros(6))
    with pytest.raises(NonMonotonicTime):
        hist.push(-0.03, np.zeros(6))


def test_history_span_and_csv_dump(tmp_path):
    hist = ResidualHistory(window=10)
    for i in range(4):
        hist.push(0.1 * i, np.arange(6, dtype=float) + i)
    assert np.isclose(hist.span, 0.3)
    path = tmp_path / "residuals.csv"
    hist.dump_csv(path)
    rows = path.read_text().strip().splitlines()
    assert rows[0] == "t,xi_fx,xi_fy,xi_fz,xi_tx,xi_ty,xi_tz"
    assert len(rows) == 5


# ---------------------------------------------------------------------------
# window fits


def test_fit_static_requires_samples():
    with pytest.raises(EmptyWindow):
        fit_static(ResidualHistory(window=4))


def test_fit_static_constant_window():
    hist = ResidualHistory(window=50)
    xi = np.array([-10.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    for i in range(50):
        hist.push(0.03 * i, xi)
    assert np.allclose(fit_static(hist), xi)


def test_fit_static_sinusoid_over_integer_periods_cancels():
    # two full periods sampled uniformly: the discrete mean vanishes
    w, dt = 300, 0.03
    f = 2.0 / (w * dt)
    hist = ResidualHistory(window=w)
    for i in range(w):
        t = dt * i
        hist.push(t, np.array([15.0 * np.sin(2 * np.pi * f * t), 0, 0, 0, 0, 0]))
    mean = fit_static(hist)
    assert abs(mean[0]) < 2 * 15.0 / w
    assert np.allclose(mean[1:], 0.0)


def test_fit_static_mixed_signal():
    w, dt = 300, 0.03
    f = 2.0 / (w * dt)
    hist = ResidualHistory(window=w)
    for i in range(w):
        t = dt * i
        hist.push(t, np.array([-7.0 + 10.0 * np.sin(2 * np.pi * f * t), 0, 0, 0, 0, 0]))
    assert abs(fit_static(hist)[0] - (-7.0)) < 0.1


def _sine_history(d, amp, freq, n, dt, phase=0.0, channel=0, rng=None, noise=0.0):
    hist = ResidualHistory(window=n)
    for i in range(n):
        t = dt * i
        xi = np.zeros(6)
        xi[channel] = d + amp * np.sin(2 * np.pi * freq * t + phase)
        if noise:
            xi[channel] += noise * rng.standard_normal()
        hist.push(t, xi)
    return hist


def test_fit_periodic_recovers_offset_sinusoid():
    # -7 + 10 sin(2 pi 0.33 t) sampled at 100 Hz over roughly two periods
    config = EstimatorConfig(window=608, dt=0.01, f_min=0.33, f_max=2.0, df=0.01)
    hist = _sine_history(-7.0, 10.0, 0.33, 607, 0.01)
    pm = fit_periodic(hist, config)
    assert abs(pm.d_static[0] - (-7.0)) < 0.1
    assert abs(pm.amplitude[0] - 10.0) < 0.1
    assert abs(pm.frequency[0] - 0.33) <= 0.01 + 1e-12
    assert np.allclose(pm.amplitude[1:], 0.0)


def test_fit_periodic_constant_signal_collapses_to_static():
    config = EstimatorConfig()
    hist = _sine_history(3.0, 0.0, 0.5, 300, 0.03)
    pm = fit_periodic(hist, config)
    assert np.isclose(pm.d_static[0], 3.0)
    assert pm.amplitude[0] == 0.0


def test_fit_periodic_below_threshold_collapses():
    # 0.8 N sits under the 1 N force-channel floor; 12 s = 6 whole periods
    config = EstimatorConfig(window=400)
    hist = _sine_history(2.0, 0.8, 0.5, 400, 0.03)
    pm = fit_periodic(hist, config)
    assert pm.amplitude[0] == 0.0
    assert abs(pm.d_static[0] - 2.0) < 1e-9


def test_fit_periodic_insufficient_window():
    config = EstimatorConfig()
    hist = _sine_history(0.0, 5.0, 0.5, 100, 0.03)  # 3 s < 2 periods of 0.25 Hz
    with pytest.raises(InsufficientWindow):
        fit_periodic(hist, config)


def test_fit_periodic_static_shift_equivariance():
    config = EstimatorConfig()
    base = _sine_history(0.0, 6.0, 0.5, 300, 0.03, phase=0.9)
    shifted = _sine_history(4.2, 6.0, 0.5, 300, 0.03, phase=0.9)
    a = fit_periodic(base, config)
    b = fit_periodic(shifted, config)
    assert abs((b.d_static[0] - a.d_static[0]) - 4.2) < 1e-9
    assert abs(b.amplitude[0] - a.amplitude[0]) < 1e-9
    assert b.frequency[0] == a.frequency[0]
    assert abs(b.phase[0] - a.phase[0]) < 1e-9


def test_fit_periodic_on_grid_amplitude_accuracy():
    # exact on-grid sinusoid over an integer number of periods
    config = EstimatorConfig(window=400, dt=0.03, f_min=0.25, f_max=2.0, df=0.01)
    hist = _sine_history(1.5, 8.0, 0.5, 400, 0.03, phase=0.4)  # 12 s = 6 periods
    pm = fit_periodic(hist, config)
    assert np.isclose(pm.frequency[0], 0.5, atol=1e-9)
    assert abs(pm.amplitude[0] - 8.0) / 8.0 < 1e-3


def test_fit_periodic_noise_monte_carlo():
    """0.5 N of white noise: amplitude within 5%, frequency on the grid cell."""
    rng = np.random.default_rng(2024)
    amp_errors, freq_errors = [], []
    config = EstimatorConfig()
    for _ in range(100):
        hist = _sine_history(-7.0, 10.0, 0.33, 300, 0.03, rng=rng, noise=0.5)
        pm = fit_periodic(hist, config)
        amp_errors.append(abs(pm.amplitude[0] - 10.0) / 10.0)
        freq_errors.append(abs(pm.frequency[0] - 0.33))
    assert np.percentile(amp_errors, 95) < 0.05
    assert np.percentile(freq_errors, 95) <= 0.01 + 1e-12


def test_torque_channel_threshold():
    # 0.05 N*m is below the 0.1 N*m torque floor, 0.5 N*m is above
    config = EstimatorConfig()
    low = _sine_history(0.0, 0.05, 0.5, 300, 0.03, channel=4)
    high = _sine_history(0.0, 0.5, 0.5, 300, 0.03, channel=4)
    assert fit_periodic(low, config).amplitude[4] == 0.0
    assert abs(fit_periodic(high, config).amplitude[4] - 0.5) < 0.01


# ---------------------------------------------------------------------------
# forecasting


def test_forecast_modes():
    pm = PeriodicModel(
        d_static=np.array([-10.0, 0, 0, 0, 0, 0]),
        amplitude=np.array([15.0, 0, 0, 0, 0, 0]),
        frequency=np.array([0.33, 0, 0, 0, 0, 0]),
        phase=np.zeros(6),
    )
    off = forecast(pm, 0.0, 4, 0.03, "off")
    assert np.all(off == 0.0)
    static = forecast(pm, 0.0, 4, 0.03, "static")
    assert np.allclose(static[:, 0], -10.0)
    assert np.allclose(static[:, 1:], 0.0)


def test_forecast_peak_value():
    # quarter period start: sine sits at its crest, -10 + 15 = 5
    pm = PeriodicModel(
        d_static=np.array([-10.0, 0, 0, 0, 0, 0]),
        amplitude=np.array([15.0, 0, 0, 0, 0, 0]),
        frequency=np.array([0.33, 0, 0, 0, 0, 0]),
        phase=np.zeros(6),
    )
    t0 = 1.0 / (4 * 0.33)
    xi = forecast(pm, t0, 3, 0.03, "periodic")
    assert np.isclose(xi[0, 0], 5.0)


def test_forecast_zero_amplitude_is_constant():
    pm = PeriodicModel.static_only(np.array([1.0, -2.0, 3.0, 0.0, 0.1, 0.0]))
    xi = forecast(pm, 7.3, 5, 0.03, "periodic")
    assert np.allclose(xi, np.tile([1.0, -2.0, 3.0, 0.0, 0.1, 0.0], (5, 1)))


def test_forecast_first_entry_matches_model_at_t0():
    pm = PeriodicModel(
        d_static=np.full(6, 0.5),
        amplitude=np.full(6, 2.0),
        frequency=np.full(6, 0.4),
        phase=np.full(6, 1.1),
    )
    t0 = 3.21
    xi = forecast(pm, t0, 2, 0.05, "periodic")
    expected = 0.5 + 2.0 * np.sin(2 * np.pi * 0.4 * t0 + 1.1)
    assert np.allclose(xi[0], expected)


def test_forecast_phase_continuity():
    pm = PeriodicModel(
        d_static=np.full(6, -1.0),
        amplitude=np.full(6, 4.0),
        frequency=np.full(6, 0.7),
        phase=np.full(6, 0.3),
    )
    a = forecast(pm, 2.0, 6, 0.03, "periodic")
    b = forecast(pm, 2.03, 6, 0.03, "periodic")
    assert np.allclose(a[1:], b[:-1], atol=1e-12)


# ---------------------------------------------------------------------------
# policy: warm-up, cadence, freeze


def _feed_policy(policy, signal, n, dt):
    for i in range(n):
        t = dt * i
        xi = np.zeros(6)
        xi[0] = signal(t)
        policy.ingest(t, xi)
        policy.update(t + dt)


def test_policy_off_mode_always_zero():
    policy = DisturbancePolicy(EstimatorConfig(), "off")
    _feed_policy(policy, lambda t: -10.0, 50, 0.03)
    assert np.all(policy.horizon_forecast(1.5, 10, 0.03) == 0.0)


def test_policy_periodic_warmup_falls_back_to_static():
    """Before the window covers two slow periods, no sinusoid is trusted."""
    config = EstimatorConfig()
    policy = DisturbancePolicy(config, "periodic")
    signal = lambda t: -10.0 + 15.0 * np.sin(2 * np.pi * 0.33 * t)
    _feed_policy(policy, signal, 100, 0.03)  # 3 s, well short of 8 s warm-up
    fc = policy.horizon_forecast(3.0, 10, 0.03)
    assert np.ptp(fc[:, 0]) == 0.0  # constant: static fallback, no oscillation
    # past warm-up the policy locks on; 12 s window = 6 whole 0.5 Hz periods
    slow = lambda t: -10.0 + 15.0 * np.sin(2 * np.pi * 0.5 * t)
    policy2 = DisturbancePolicy(EstimatorConfig(window=400), "periodic")
    for i in range(400):
        t = 0.03 * i
        xi = np.zeros(6)
        xi[0] = slow(t)
        policy2.ingest(t, xi)
    policy2.update(12.0)
    fc2 = policy2.horizon_forecast(12.0, 10, 0.03)
    expected = np.array([slow(12.0 + 0.03 * i) for i in range(10)])
    assert np.max(np.abs(fc2[:, 0] - expected)) < 0.05


def test_policy_static_freezes_after_configured_time():
    config = EstimatorConfig(static_freeze_time=6.0)
    policy = DisturbancePolicy(config, "static")
    _feed_policy(policy, lambda t: -10.0, 220, 0.03)  # through 6.6 s
    frozen = policy.horizon_forecast(6.6, 5, 0.03).copy()
    # later samples with a very different level must not move the estimate
    for i in range(220, 400):
        t = 0.03 * i
        xi = np.zeros(6)
        xi[0] = 40.0
        policy.ingest(t, xi)
        policy.update(t + 0.03)
    assert np.allclose(policy.horizon_forecast(12.0, 5, 0.03), frozen)


def test_policy_continuous_static_keeps_tracking():
    config = EstimatorConfig(static_freeze_time=6.0, continuous_static=True)
    policy = DisturbancePolicy(config, "static")
    _feed_policy(policy, lambda t: -10.0, 220, 0.03)
    before = policy.horizon_forecast(6.6, 1, 0.03)[0, 0]
    for i in range(220, 520):
        t = 0.03 * i
        xi = np.zeros(6)
        xi[0] = 40.0
        policy.ingest(t, xi)
        policy.update(t + 0.03)
    after = policy.horizon_forecast(15.6, 1, 0.03)[0, 0]
    assert before < 0.0 < after  # window mean followed the new level


def test_policy_refit_cadence():
    config = EstimatorConfig(refit_interval=0.1)
    policy = DisturbancePolicy(config, "static")
    policy.ingest(0.0, np.array([5.0, 0, 0, 0, 0, 0]))
    policy.update(0.03)
    first = policy.horizon_forecast(0.03, 1, 0.03)[0, 0]
    # a wildly different sample inside the cadence interval is not refit yet
    policy.ingest(0.03, np.array([50.0, 0, 0, 0, 0, 0]))
    policy.update(0.06)
    assert policy.horizon_forecast(0.06, 1, 0.03)[0, 0] == first
    policy.update(0.13)  # past the 0.1 s cadence
    assert policy.horizon_forecast(0.13, 1, 0.03)[0, 0] != first

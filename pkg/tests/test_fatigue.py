"""Fatigue feature extraction, detection, line fitting, and compensation."""
import math

import numpy as np
import pytest

from prosim.errors import InsufficientDataError, SingularFitError
from prosim.fatigue import (
    DECLINE_FLOOR,
    FatigueCompensator,
    FatigueConfig,
    FatigueModel,
    FatigueState,
    MuscleFatigueTracker,
    compensation_factor,
    detect_sustained,
    fit_fatigue,
    rms,
    update_and_compensate,
)

from oracles import window_mean_detect


class TestRms:
    def test_constant(self):
        assert rms(np.full(100, -2.5)) == pytest.approx(2.5)

    def test_unit_sine_whole_periods(self):
        t = np.arange(1000) / 1000.0
        x = np.sin(2 * np.pi * 10.0 * t)  # exactly 10 periods
        assert rms(x) == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-3)

    def test_three_four(self):
        assert rms([3.0, 4.0]) == pytest.approx(3.53553, abs=1e-5)

    def test_empty_rejected(self):
        with pytest.raises(InsufficientDataError):
            rms([])


class TestDetectSustained:
    CFG = FatigueConfig(window_samples=2000, activation_threshold=0.20)

    def test_constant_above_threshold_true_after_fill(self):
        x = np.full(5000, 0.30)
        d = detect_sustained(x, self.CFG)
        assert not d[: 1999].any()
        assert d[1999:].all()

    def test_constant_below_threshold_never(self):
        assert not detect_sustained(np.full(5000, 0.10), self.CFG).any()

    def test_balanced_alternation_detected(self):
        x = np.tile([0.05, 0.45], 2500)  # window mean 0.25
        d = detect_sustained(x, self.CFG)
        assert d[2000:].all()

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(21)
        x = rng.uniform(0.0, 0.4, 800)
        cfg = FatigueConfig(window_samples=50, activation_threshold=0.20)
        assert np.array_equal(detect_sustained(x, cfg), window_mean_detect(x, 50, 0.20))

    def test_short_input_all_false(self):
        assert not detect_sustained(np.full(100, 1.0), self.CFG).any()


class TestFitFatigue:
    def test_exact_line(self):
        t = np.linspace(0, 300, 151)
        series = [(float(ti), 1.0 - 0.002 * ti) for ti in t]
        m = fit_fatigue(series)
        assert m.slope == pytest.approx(-0.002, abs=1e-12)
        assert m.intercept == pytest.approx(1.0, abs=1e-12)
        assert m.r_squared == pytest.approx(1.0)

    def test_constant_series_zero_slope_convention(self):
        series = [(float(t), 0.8) for t in range(10)]
        m = fit_fatigue(series)
        assert m.slope == pytest.approx(0.0, abs=1e-12)
        assert m.r_squared == 1.0

    def test_identical_timestamps_rejected(self):
        with pytest.raises(SingularFitError):
            fit_fatigue([(1.0, 0.5), (1.0, 0.6), (1.0, 0.7)])

    def test_noisy_decline_recovers_slope(self):
        # 2% amplitude noise on a 300 s decline, one point per 2 s
        rng = np.random.default_rng(22)
        t = np.arange(0, 300, 2.0)
        y = 1.0 - 0.002 * t + rng.normal(0.0, 0.02, t.size)
        m = fit_fatigue(list(zip(t, y)))
        assert abs(m.slope - (-0.002)) / 0.002 < 0.10
        assert m.r_squared > 0.8


class TestCompensation:
    def test_zero_slope_identity(self):
        model = FatigueModel(slope=0.0)
        state = FatigueState()
        for _ in range(100):
            state, out = update_and_compensate(state, True, 0.1, model, 0.77)
            assert state.c_fi == 1.0
            assert out == pytest.approx(0.77)

    def test_inverts_linear_decline_at_50s(self):
        model = FatigueModel(slope=-0.002, intercept=1.0)
        state = FatigueState()
        for _ in range(500):
            state, out = update_and_compensate(state, True, 0.1, model, 0.90)
        assert state.contraction_elapsed_s == pytest.approx(50.0)
        assert state.c_fi == pytest.approx(1.0 / 0.9, abs=1e-9)
        assert out == pytest.approx(1.0, abs=1e-9)

    def test_saturation_at_four_x(self):
        model = FatigueModel(slope=-0.01, intercept=1.0)
        state = FatigueState(contraction_elapsed_s=1000.0)
        state, out = update_and_compensate(state, True, 0.1, model, 1.0)
        assert state.c_fi == pytest.approx(1.0 / DECLINE_FLOOR)
        assert out == pytest.approx(4.0)

    def test_recovery_decays_elapsed(self):
        model = FatigueModel(slope=-0.002)
        state = FatigueState(contraction_elapsed_s=30.0)
        for _ in range(400):
            state, _ = update_and_compensate(state, False, 0.1, model, 1.0)
        assert state.contraction_elapsed_s == 0.0
        assert state.c_fi == 1.0

    def test_factor_at_least_one_for_nonpositive_slope(self):
        rng = np.random.default_rng(23)
        for _ in range(200):
            model = FatigueModel(slope=-rng.uniform(0, 0.01), intercept=rng.uniform(0.8, 1.2))
            elapsed = rng.uniform(0, 200)
            assert compensation_factor(model, elapsed) >= 1.0

    def test_position_channel_untouched(self):
        model = FatigueModel(slope=-0.005)
        state = FatigueState()
        for detected in [True, True, False, True]:
            state, _ = update_and_compensate(state, detected, 0.5, model, 1.0)
            assert state.c_fp == 0.0

    def test_rejects_nonpositive_dt(self):
        with pytest.raises(ValueError):
            update_and_compensate(FatigueState(), True, 0.0, FatigueModel(), 1.0)


class TestTrackers:
    def test_tracker_detection_lag_matches_window(self):
        cfg = FatigueConfig(window_samples=100, activation_threshold=0.2)
        tracker = MuscleFatigueTracker(FatigueModel(slope=-0.002), cfg)
        flags = [tracker.push_envelope(0.5) for _ in range(150)]
        assert not any(flags[:99])
        assert all(flags[99:])

    def test_compensator_mean_of_muscle_factors(self):
        cfg = FatigueConfig(window_samples=10, activation_threshold=0.2)
        comp = FatigueCompensator(
            FatigueModel(slope=-0.01), FatigueModel(slope=0.0), cfg
        )
        for _ in range(10):
            comp.push_envelopes(0.5, 0.5)
        for _ in range(100):
            comp.push_envelopes(0.5, 0.5)
            comp.step(0.5)
        cb = comp.biceps.state.c_fi
        ct = comp.triceps.state.c_fi
        assert ct == 1.0
        assert cb > 1.0
        assert comp.factor == pytest.approx(0.5 * (cb + ct))

    def test_reset_clears_state(self):
        comp = FatigueCompensator(FatigueModel(slope=-0.01), None, FatigueConfig(10, 0.2))
        for _ in range(50):
            comp.push_envelopes(0.9, 0.9)
            comp.step(1.0)
        assert comp.factor > 1.0
        comp.reset()
        assert comp.factor == 1.0
        assert comp.biceps.state.contraction_elapsed_s == 0.0

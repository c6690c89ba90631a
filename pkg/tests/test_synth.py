"""Generator tests: determinism, calibration closure, fatigue realism, ECG."""
import json
import math

import numpy as np
import pytest

from prosim.conditioning import (
    CHANNELS,
    ChannelId,
    PipelineConfig,
    bandpass_array,
    condition_arrays,
)
from prosim.errors import ConfigurationError
from prosim.estimation import estimate_torque_elbow90, BiomechParams
from prosim.fatigue import rms
from prosim.synth import (
    ActivationProfile,
    ArtifactSpec,
    Segment,
    StreamingSynth,
    calibration_session_profile,
    generate,
    generate_arrays,
    load_profile_json,
)


class TestDeterminism:
    def test_same_seed_identical(self):
        prof = ActivationProfile.constant({ChannelId.BICEPS: 0.4}, 2.0)
        spec = ArtifactSpec(seed=5, ecg_amplitude_mv=1.0, powerline_amplitude_mv=0.02)
        _, a = generate_arrays(prof, spec)
        _, b = generate_arrays(prof, spec)
        for ch in CHANNELS:
            assert np.array_equal(a[ch], b[ch])

    def test_different_seed_differs(self):
        prof = ActivationProfile.constant({ChannelId.BICEPS: 0.4}, 1.0)
        _, a = generate_arrays(prof, ArtifactSpec(seed=1))
        _, b = generate_arrays(prof, ArtifactSpec(seed=2))
        assert not np.array_equal(a[ChannelId.BICEPS], b[ChannelId.BICEPS])

    def test_frame_surface(self):
        prof = ActivationProfile.constant({ChannelId.BICEPS: 0.3}, 0.5)
        frames = generate(prof, ArtifactSpec(seed=3))
        assert len(frames) == 500
        assert frames[1].t_ms - frames[0].t_ms == pytest.approx(1.0)


class TestCalibrationClosure:
    def test_rest_noise_floor(self):
        prof = ActivationProfile(duration_s=5.0, segments={})
        t, raw = generate_arrays(prof, ArtifactSpec(seed=6))
        t2, env = condition_arrays(t, raw, PipelineConfig())
        for ch in CHANNELS:
            assert env[ch].max() < 0.02

    @pytest.mark.parametrize("u", [0.2, 0.5, 0.8])
    def test_constant_activation_recovered(self, u):
        prof = ActivationProfile.constant({ChannelId.TRICEPS: u}, 8.0)
        t, raw = generate_arrays(prof, ArtifactSpec(seed=7))
        t2, env = condition_arrays(t, raw, PipelineConfig())
        settled = env[ChannelId.TRICEPS][t2 >= 1500.0]
        assert abs(settled.mean() - u) <= 0.05


class TestFatigueRealism:
    def test_binned_rms_slope_matches_generator(self):
        slope = -0.002
        prof = ActivationProfile.constant({ChannelId.BICEPS: 0.6}, 300.0)
        spec = ArtifactSpec(seed=8, fatigue_slope_per_s={ChannelId.BICEPS: slope})
        t, raw = generate_arrays(prof, spec)
        cfg = PipelineConfig()
        x = bandpass_array(raw[ChannelId.BICEPS][cfg.startup_discard:], cfg.filter, cfg.fs_hz)
        fs = cfg.fs_hz
        bin_s = 30.0
        n_bin = int(bin_s * fs)
        times, amps = [], []
        for k in range(x.size // n_bin):
            seg = x[k * n_bin : (k + 1) * n_bin]
            times.append((k + 0.5) * bin_s)
            amps.append(rms(seg))
        amps = np.array(amps) / amps[0]
        coef = np.polyfit(times, amps, 1)
        fitted = coef[0]
        pred = np.polyval(coef, times)
        ss_res = float(np.sum((amps - pred) ** 2))
        ss_tot = float(np.sum((amps - np.mean(amps)) ** 2))
        r2 = 1.0 - ss_res / ss_tot
        assert abs(fitted - slope) / abs(slope) < 0.15
        assert r2 > 0.8


class TestEcgInjection:
    def test_raises_rest_envelope_on_pectoralis_only(self):
        prof = ActivationProfile(duration_s=5.0, segments={})
        clean_t, clean = generate_arrays(prof, ArtifactSpec(seed=9))
        _, env_clean = condition_arrays(clean_t, clean, PipelineConfig())
        ecg_t, ecg = generate_arrays(prof, ArtifactSpec(seed=9, ecg_amplitude_mv=2.0))
        _, env_ecg = condition_arrays(ecg_t, ecg, PipelineConfig())
        assert env_ecg[ChannelId.PECTORALIS].max() > 3 * env_clean[ChannelId.PECTORALIS].max()
        for ch in (ChannelId.BICEPS, ChannelId.TRICEPS, ChannelId.TRAPEZIUS):
            assert np.array_equal(env_ecg[ch], env_clean[ch])


class TestProfiles:
    def test_segment_validation(self):
        with pytest.raises(ConfigurationError):
            Segment(1.0, 0.5, 0.5)
        with pytest.raises(ConfigurationError):
            Segment(0.0, 1.0, 1.5)

    def test_piecewise_values_with_ramp(self):
        prof = ActivationProfile(
            duration_s=4.0,
            segments={ChannelId.BICEPS: [Segment(1.0, 3.0, 0.0, 1.0)]},
        )
        t = np.array([0.5, 1.0, 2.0, 2.999, 3.5])
        u = prof.values(ChannelId.BICEPS, t)
        assert u[0] == 0.0
        assert u[1] == pytest.approx(0.0)
        assert u[2] == pytest.approx(0.5)
        assert u[3] == pytest.approx(1.0, abs=1e-3)
        assert u[4] == 0.0

    def test_json_round_trip(self, tmp_path):
        prof = ActivationProfile(
            duration_s=6.0,
            segments={
                ChannelId.BICEPS: [Segment(0.0, 5.0, 0.5)],
                ChannelId.TRAPEZIUS: [Segment(1.0, 4.0, 0.2, 0.8)],
            },
        )
        path = tmp_path / "profile.json"
        d = prof.to_json_dict()
        d["artifacts"] = {"seed": 42, "ecg_amplitude_mv": 1.5}
        path.write_text(json.dumps(d))
        back, spec = load_profile_json(path)
        assert back.duration_s == prof.duration_s
        assert spec.seed == 42
        assert spec.ecg_amplitude_mv == 1.5
        for ch, segs in prof.segments.items():
            assert back.segments[ch] == segs

    def test_bare_list_profile(self, tmp_path):
        path = tmp_path / "p.json"
        path.write_text(json.dumps([
            {"channel": "biceps", "segments": [{"t0": 0, "t1": 5, "u": 0.5}]}
        ]))
        prof, spec = load_profile_json(path)
        assert prof.duration_s == 5.0
        assert spec.seed == 0


class TestCalibrationSessionProfile:
    def test_activations_consistent_with_torque_model(self):
        loads = [0.0, 0.5, 1.0, 1.28, 2.26, 2.76, 3.76]
        biomech = BiomechParams()
        torques = [
            estimate_torque_elbow90(BiomechParams(load_kg=m)) for m in loads
        ]
        prof = calibration_session_profile(loads, torques)
        tau_norm = np.array(torques) / max(torques)
        for i, tn in enumerate(tau_norm):
            t_mid = np.array([i * 8.0 + 3.0])
            agon = prof.values(ChannelId.BICEPS, t_mid)[0]
            anta = prof.values(ChannelId.TRICEPS, t_mid)[0]
            assert 1.8612 * agon - 1.0 * anta == pytest.approx(tn, abs=1e-9)


class TestStreamingSynth:
    def test_deterministic_per_seed(self):
        a = StreamingSynth(ArtifactSpec(seed=10))
        b = StreamingSynth(ArtifactSpec(seed=10))
        a.set_activation({ChannelId.BICEPS: 0.5})
        b.set_activation({ChannelId.BICEPS: 0.5})
        for _ in range(50):
            _, blk_a = a.next_block(2)
            _, blk_b = b.next_block(2)
            for ch in CHANNELS:
                assert np.array_equal(blk_a[ch], blk_b[ch])

    def test_envelope_closure_through_streaming_path(self):
        from prosim.conditioning import StreamingConditioner

        synth = StreamingSynth(ArtifactSpec(seed=11))
        synth.set_activation({ChannelId.BICEPS: 0.5, ChannelId.TRICEPS: 0.5})
        sc = StreamingConditioner(PipelineConfig())
        values = []
        for i in range(5000):
            t, raw = synth.next_block(2)
            t_out, env = sc.push_block(t, raw)
            if t_out.size and t_out[-1] >= 2000.0:
                values.append(env[ChannelId.BICEPS][-1])
        assert abs(np.mean(values) - 0.5) <= 0.05

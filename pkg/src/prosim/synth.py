"""Deterministic seeded generator of surrogate raw sEMG streams.

The carrier is band-limited zero-mean Gaussian noise, the standard surrogate
for the interference pattern of many motor units. Its scale is calibrated so
that the conditioning pipeline's envelope recovers the commanded activation:
for a Gaussian the rectified mean is sigma*sqrt(2/pi), and a correction factor
accounts for the second pass the signal takes through the pipeline band-pass.
"""
from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import signal

from .conditioning import CHANNELS, ChannelId, FilterSpec, SemgFrame, frames_from_arrays
from .errors import ConfigurationError


@dataclass
class Segment:
    """One activation segment: u ramps linearly from u0 at t0 to u1 at t1."""

    t0: float
    t1: float
    u0: float
    u1: Optional[float] = None

    def __post_init__(self):
        if self.u1 is None:
            self.u1 = self.u0
        if self.t1 <= self.t0:
            raise ConfigurationError("segment must have t1 > t0")
        for u in (self.u0, self.u1):
            if not (0.0 <= u <= 1.0):
                raise ConfigurationError("activation must lie in [0, 1]")


@dataclass
class ActivationProfile:
    """Per-channel piecewise-linear activation u(t) in [0,1]; zero outside segments."""

    duration_s: float
    segments: Dict[ChannelId, List[Segment]] = field(default_factory=dict)

    def values(self, ch: ChannelId, t_s: np.ndarray) -> np.ndarray:
        u = np.zeros_like(t_s)
        for seg in self.segments.get(ch, []):
            m = (t_s >= seg.t0) & (t_s < seg.t1)
            frac = (t_s[m] - seg.t0) / (seg.t1 - seg.t0)
            u[m] = seg.u0 + (seg.u1 - seg.u0) * frac
        return np.clip(u, 0.0, 1.0)

    @classmethod
    def constant(cls, levels: Dict[ChannelId, float], duration_s: float) -> "ActivationProfile":
        return cls(
            duration_s=duration_s,
            segments={ch: [Segment(0.0, duration_s, u)] for ch, u in levels.items()},
        )

    def to_json_dict(self) -> dict:
        return {
            "duration_s": self.duration_s,
            "channels": [
                {
                    "channel": ch.value,
                    "segments": [
                        {"t0": s.t0, "t1": s.t1, "u": s.u0, "u_end": s.u1}
                        for s in segs
                    ],
                }
                for ch, segs in self.segments.items()
            ],
        }

    @classmethod
    def from_json_dict(cls, d) -> "ActivationProfile":
        if isinstance(d, list):  # bare channel list; duration from the last segment
            channels = d
            duration = max((s["t1"] for c in channels for s in c["segments"]), default=0.0)
        else:
            channels = d.get("channels", [])
            duration = float(d.get("duration_s") or max(
                (s["t1"] for c in channels for s in c["segments"]), default=0.0
            ))
        segments: Dict[ChannelId, List[Segment]] = {}
        for c in channels:
            ch = ChannelId(c["channel"])
            segments[ch] = [
                Segment(float(s["t0"]), float(s["t1"]), float(s["u"]), s.get("u_end"))
                for s in c["segments"]
            ]
        return cls(duration_s=duration, segments=segments)


@dataclass
class ArtifactSpec:
    """Artifact/noise content and the seed fixing all randomness."""

    ecg_amplitude_mv: float = 0.0
    ecg_rate_hz: float = 1.2
    powerline_hz: float = 50.0
    powerline_amplitude_mv: float = 0.0
    fatigue_slope_per_s: Dict[ChannelId, float] = field(default_factory=dict)
    baseline_noise_mv: float = 0.01
    seed: int = 0

    def validate(self) -> None:
        if self.ecg_amplitude_mv < 0 or self.powerline_amplitude_mv < 0 or self.baseline_noise_mv < 0:
            raise ConfigurationError("artifact amplitudes must be >= 0")


@functools.lru_cache(maxsize=8)
def _carrier_calibration(fs_hz: float, low: float, high: float, order: int) -> Tuple[float, float]:
    """(unit-variance normalizer, pipeline calibration constant) for the carrier.

    E1 is the impulse-response energy of the generation band-pass (variance of
    once-filtered unit white noise); E2 the energy after a second pass. The
    pipeline sees the carrier twice, so the rectified-Gaussian mean there is
    sqrt(E2/E1)*sqrt(2/pi) per unit carrier std.
    """
    sos = signal.butter(order, [low / (fs_hz / 2), high / (fs_hz / 2)], btype="band", output="sos")
    imp = np.zeros(8192)
    imp[0] = 1.0
    h1 = signal.sosfilt(sos, imp)
    h2 = signal.sosfilt(sos, h1)
    e1 = float(np.sum(h1**2))
    e2 = float(np.sum(h2**2))
    return math.sqrt(e1), math.sqrt(math.pi / 2.0) * math.sqrt(e1 / e2)


def _channel_rngs(seed: int) -> Dict[ChannelId, np.random.Generator]:
    seqs = np.random.SeedSequence(seed).spawn(len(CHANNELS) + 1)
    return {ch: np.random.default_rng(seqs[i]) for i, ch in enumerate(CHANNELS)}


def _ecg_template(fs_hz: float) -> np.ndarray:
    """Biphasic spike, 30 ms total; only its envelope-level effect matters."""
    n = int(round(0.03 * fs_hz))
    t = np.linspace(0.0, 1.0, n, endpoint=False)
    return np.sin(2.0 * np.pi * t) * np.hanning(n)


def generate_arrays(
    profile: ActivationProfile,
    spec: ArtifactSpec,
    fs_hz: float = 1000.0,
    mvc: Optional[Dict[ChannelId, float]] = None,
    filter_spec: Optional[FilterSpec] = None,
) -> Tuple[np.ndarray, Dict[ChannelId, np.ndarray]]:
    """Raw stream as arrays: (t_ms, per-channel mV). Deterministic per seed."""
    spec.validate()
    mvc = mvc or {ch: 1.0 for ch in CHANNELS}
    fspec = filter_spec or FilterSpec()
    if fs_hz < 2.0 * fspec.high_cut_hz:
        raise ConfigurationError("sample rate must cover the carrier band")
    n = int(round(profile.duration_s * fs_hz))
    t_s = np.arange(n) / fs_hz
    t_ms = t_s * 1000.0
    sos = fspec.design_sos(fs_hz)
    sigma_h, cal = _carrier_calibration(fs_hz, fspec.low_cut_hz, fspec.high_cut_hz, fspec.order)
    rngs = _channel_rngs(spec.seed)

    out: Dict[ChannelId, np.ndarray] = {}
    for ch in CHANNELS:
        rng = rngs[ch]
        u = profile.values(ch, t_s)
        slope = spec.fatigue_slope_per_s.get(ch, 0.0)
        t_active = np.cumsum(u > 0.0) / fs_hz
        amp = u * np.maximum(1.0 + slope * t_active, 0.0)
        carrier = signal.sosfilt(sos, rng.standard_normal(n)) / sigma_h
        x = carrier * amp * mvc[ch] * cal
        x += rng.normal(0.0, spec.baseline_noise_mv, n) if spec.baseline_noise_mv > 0 else 0.0
        if spec.powerline_amplitude_mv > 0.0:
            x += spec.powerline_amplitude_mv * np.sin(2.0 * np.pi * spec.powerline_hz * t_s)
        if ch is ChannelId.PECTORALIS and spec.ecg_amplitude_mv > 0.0:
            tpl = _ecg_template(fs_hz) * spec.ecg_amplitude_mv
            period = int(round(fs_hz / spec.ecg_rate_hz))
            for start in range(0, n, period):
                stop = min(start + tpl.size, n)
                x[start:stop] += tpl[: stop - start]
        out[ch] = x
    return t_ms, out


def generate(
    profile: ActivationProfile,
    spec: ArtifactSpec,
    fs_hz: float = 1000.0,
    mvc: Optional[Dict[ChannelId, float]] = None,
) -> List[SemgFrame]:
    """Frame-level surface over generate_arrays."""
    t_ms, arrays = generate_arrays(profile, spec, fs_hz, mvc)
    return frames_from_arrays(t_ms, arrays)


class StreamingSynth:
    """Block-streaming generator for the live session: same carrier statistics
    as the batch path, with activation levels supplied on the fly."""

    def __init__(
        self,
        spec: ArtifactSpec,
        fs_hz: float = 1000.0,
        mvc: Optional[Dict[ChannelId, float]] = None,
        filter_spec: Optional[FilterSpec] = None,
    ):
        spec.validate()
        self.spec = spec
        self.fs_hz = fs_hz
        self.mvc = mvc or {ch: 1.0 for ch in CHANNELS}
        fspec = filter_spec or FilterSpec()
        self._sos = fspec.design_sos(fs_hz)
        self._sigma_h, self._cal = _carrier_calibration(
            fs_hz, fspec.low_cut_hz, fspec.high_cut_hz, fspec.order
        )
        self._ecg_tpl = _ecg_template(fs_hz)
        self._ecg_period = int(round(fs_hz / spec.ecg_rate_hz)) if spec.ecg_rate_hz > 0 else 0
        self.reset()

    def reset(self) -> None:
        self._rngs = _channel_rngs(self.spec.seed)
        nsec = self._sos.shape[0]
        self._zi = {ch: np.zeros((nsec, 2)) for ch in CHANNELS}
        self._t_active = {ch: 0.0 for ch in CHANNELS}
        self._sample_index = 0
        self.activation: Dict[ChannelId, float] = {ch: 0.0 for ch in CHANNELS}

    def set_activation(self, levels: Dict[ChannelId, float]) -> None:
        for ch, u in levels.items():
            self.activation[ch] = min(max(float(u), 0.0), 1.0)

    def next_block(self, n: int) -> Tuple[np.ndarray, Dict[ChannelId, np.ndarray]]:
        """Generate the next n raw samples under the currently held activations."""
        i0 = self._sample_index
        idx = np.arange(i0, i0 + n)
        t_s = idx / self.fs_hz
        t_ms = t_s * 1000.0
        out: Dict[ChannelId, np.ndarray] = {}
        spec = self.spec
        for ch in CHANNELS:
            rng = self._rngs[ch]
            u = self.activation[ch]
            slope = spec.fatigue_slope_per_s.get(ch, 0.0)
            if u > 0.0:
                t_act = self._t_active[ch] + np.arange(1, n + 1) / self.fs_hz
                self._t_active[ch] = float(t_act[-1])
            else:
                t_act = np.full(n, self._t_active[ch])
            amp = u * np.maximum(1.0 + slope * t_act, 0.0)
            white = rng.standard_normal(n)
            carrier, self._zi[ch] = signal.sosfilt(self._sos, white, zi=self._zi[ch])
            x = (carrier / self._sigma_h) * amp * self.mvc[ch] * self._cal
            if spec.baseline_noise_mv > 0:
                x = x + rng.normal(0.0, spec.baseline_noise_mv, n)
            if spec.powerline_amplitude_mv > 0.0:
                x = x + spec.powerline_amplitude_mv * np.sin(2.0 * np.pi * spec.powerline_hz * t_s)
            if ch is ChannelId.PECTORALIS and spec.ecg_amplitude_mv > 0.0 and self._ecg_period > 0:
                tpl = self._ecg_tpl * spec.ecg_amplitude_mv
                for k, i in enumerate(idx):
                    off = i % self._ecg_period
                    if off < tpl.size:
                        x[k] += tpl[off]
            out[ch] = x
        self._sample_index += n
        return t_ms, out


def load_profile_json(path) -> Tuple[ActivationProfile, ArtifactSpec]:
    """Read an activation script plus optional artifact settings from JSON."""
    with open(path) as f:
        d = json.load(f)
    if isinstance(d, list):
        return ActivationProfile.from_json_dict(d), ArtifactSpec()
    profile = ActivationProfile.from_json_dict(d)
    art = d.get("artifacts", {})
    fat = {ChannelId(k): float(v) for k, v in art.get("fatigue_slope_per_s", {}).items()}
    spec = ArtifactSpec(
        ecg_amplitude_mv=float(art.get("ecg_amplitude_mv", 0.0)),
        ecg_rate_hz=float(art.get("ecg_rate_hz", 1.2)),
        powerline_hz=float(art.get("powerline_hz", 50.0)),
        powerline_amplitude_mv=float(art.get("powerline_amplitude_mv", 0.0)),
        fatigue_slope_per_s=fat,
        baseline_noise_mv=float(art.get("baseline_noise_mv", 0.01)),
        seed=int(art.get("seed", 0)),
    )
    return profile, spec


def calibration_session_profile(
    loads_kg: Sequence[float],
    biomech_torques: Sequence[float],
    kappa: float = 1.8612,
    lam: float = 1.0,
    trial_s: float = 6.0,
    rest_s: float = 2.0,
    anta_base: float = 0.05,
    anta_gain: float = 0.45,
    torque_noise: float = 0.0,
    noise_seed: int = 0,
) -> ActivationProfile:
    """Activation script of a calibration session consistent with the torque model.

    The antagonist cycles through co-contraction levels decorrelated from the
    load schedule (otherwise the two regression columns are collinear) and the
    agonist supplies whatever activation the normalized trial torque requires:
    agon = (tau_norm + lam*anta)/kappa. torque_noise perturbs the exerted
    torque by that fraction of the session maximum (operator inaccuracy).
    """
    if len(loads_kg) != len(biomech_torques):
        raise ConfigurationError("one torque per load required")
    tau = np.asarray(biomech_torques, dtype=float)
    tau_norm = tau / np.max(np.abs(tau))
    if torque_noise > 0.0:
        rng = np.random.default_rng(noise_seed)
        tau_norm = tau_norm + rng.normal(0.0, torque_noise, tau_norm.size)
    biceps: List[Segment] = []
    triceps: List[Segment] = []
    t = 0.0
    for i, tn in enumerate(tau_norm):
        anta = anta_base + anta_gain * ((i * 0.618034) % 1.0)
        agon = (tn + lam * anta) / kappa
        if not (0.0 <= agon <= 1.0 and 0.0 <= anta <= 1.0):
            raise ConfigurationError("co-contraction schedule drives activation out of [0,1]")
        biceps.append(Segment(t, t + trial_s, agon))
        triceps.append(Segment(t, t + trial_s, anta))
        t += trial_s + rest_s
    return ActivationProfile(
        duration_s=t, segments={ChannelId.BICEPS: biceps, ChannelId.TRICEPS: triceps}
    )

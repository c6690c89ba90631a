"""Raw sEMG conditioning: band-pass, rectification, smoothing, MVC normalization.

The chain mirrors the usual myoelectric front end: discard startup samples,
Butterworth band-pass, full-wave rectify, causal moving average, envelope
detection, then per-channel MVC normalization with a bias offset.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Sequence

import numpy as np
from scipy import signal

from .errors import ConfigurationError


class ChannelId(Enum):
    """The four measurement sites.

    Biceps/triceps drive stiffness estimation; trapezius/pectoralis major
    drive position estimation.
    """

    BICEPS = "biceps"
    TRICEPS = "triceps"
    TRAPEZIUS = "trapezius"
    PECTORALIS = "pectoralis"


CHANNELS = (ChannelId.BICEPS, ChannelId.TRICEPS, ChannelId.TRAPEZIUS, ChannelId.PECTORALIS)
STIFFNESS_CHANNELS = (ChannelId.BICEPS, ChannelId.TRICEPS)
POSITION_CHANNELS = (ChannelId.TRAPEZIUS, ChannelId.PECTORALIS)

# One-pole envelope detector time constant (seconds).
ENVELOPE_TAU_S = 0.1


@dataclass
class SemgFrame:
    """One multi-channel raw sample: time in ms plus amplitude in mV per channel."""

    t_ms: float
    samples: Dict[ChannelId, float]


@dataclass
class ConditionedSample:
    """One multi-channel normalized envelope sample."""

    t_ms: float
    envelope: Dict[ChannelId, float]


@dataclass
class FilterSpec:
    """Band-pass corner frequencies (Hz) and Butterworth order."""

    low_cut_hz: float = 20.0
    high_cut_hz: float = 450.0
    order: int = 4

    def validate(self, fs_hz: float) -> None:
        if not (0.0 < self.low_cut_hz < self.high_cut_hz < fs_hz / 2.0):
            raise ConfigurationError(
                f"band edges must satisfy 0 < low < high < fs/2, got "
                f"[{self.low_cut_hz}, {self.high_cut_hz}] at fs={fs_hz}"
            )
        if self.order < 1:
            raise ConfigurationError("filter order must be a positive integer")

    def design_sos(self, fs_hz: float) -> np.ndarray:
        """Second-order sections for the digital band-pass (bilinear transform)."""
        self.validate(fs_hz)
        nyq = fs_hz / 2.0
        return signal.butter(
            self.order,
            [self.low_cut_hz / nyq, self.high_cut_hz / nyq],
            btype="band",
            output="sos",
        )


def _default_mvc() -> Dict[ChannelId, float]:
    return {ch: 1.0 for ch in CHANNELS}


def _default_bias() -> Dict[ChannelId, float]:
    return {ch: 0.0 for ch in CHANNELS}


@dataclass
class PipelineConfig:
    """Conditioning parameters for a session."""

    fs_hz: float = 1000.0
    filter: FilterSpec = field(default_factory=FilterSpec)
    window_s: float = 0.5
    startup_discard: int = 500
    mvc: Dict[ChannelId, float] = field(default_factory=_default_mvc)
    bias: Dict[ChannelId, float] = field(default_factory=_default_bias)

    def validate(self) -> None:
        self.filter.validate(self.fs_hz)
        if round(self.window_s * self.fs_hz) < 1:
            raise ConfigurationError("moving-average window shorter than one sample")
        if self.startup_discard < 0:
            raise ConfigurationError("startup_discard must be >= 0")
        for ch in CHANNELS:
            if self.mvc.get(ch, 0.0) <= 0.0:
                raise ConfigurationError(f"MVC for {ch.value} must be strictly positive")

    @property
    def window_samples(self) -> int:
        return int(round(self.window_s * self.fs_hz))


def rectify(x):
    """Full-wave rectification: |x| (scalar or array)."""
    return np.abs(x)


def bandpass_array(x: np.ndarray, spec: FilterSpec, fs_hz: float) -> np.ndarray:
    """Causal zero-initial-state band-pass of a 1-D array."""
    sos = spec.design_sos(fs_hz)
    return signal.sosfilt(sos, np.asarray(x, dtype=float))


def bandpass_filter(stream: Sequence[SemgFrame], spec: FilterSpec, fs_hz: float) -> List[SemgFrame]:
    """Band-pass every channel of a frame sequence; output length equals input."""
    if not stream:
        return []
    filtered = {
        ch: bandpass_array(np.array([f.samples[ch] for f in stream]), spec, fs_hz)
        for ch in CHANNELS
    }
    return [
        SemgFrame(t_ms=f.t_ms, samples={ch: float(filtered[ch][i]) for ch in CHANNELS})
        for i, f in enumerate(stream)
    ]


def moving_average(x: np.ndarray, window_s: float, fs_hz: float) -> np.ndarray:
    """Causal mean over the most recent min(N, samples-so-far) values, N = round(window_s*fs)."""
    n = int(round(window_s * fs_hz))
    if n < 1:
        raise ConfigurationError("moving-average window shorter than one sample")
    x = np.asarray(x, dtype=float)
    cs = np.concatenate(([0.0], np.cumsum(x)))
    idx = np.arange(1, x.size + 1)
    lo = np.maximum(idx - n, 0)
    return (cs[idx] - cs[lo]) / np.minimum(idx, n)


def envelope_detect(x: np.ndarray, fs_hz: float, tau_s: float = ENVELOPE_TAU_S) -> np.ndarray:
    """One-pole low-pass envelope stage (time constant tau_s), zero initial state.

    Unity DC gain, so a constant input settles to itself; scaling the input by
    c > 0 scales the output by exactly c.
    """
    k = 1.0 - math.exp(-1.0 / (fs_hz * tau_s))
    return signal.lfilter([k], [1.0, k - 1.0], np.asarray(x, dtype=float))


def normalize_mvc(x, mvc: float, bias: float = 0.0):
    """max(x/mvc - bias, 0); requires mvc > 0."""
    if mvc <= 0.0:
        raise ConfigurationError("MVC must be strictly positive")
    return np.maximum(np.asarray(x, dtype=float) / mvc - bias, 0.0)


def condition_arrays(
    t_ms: np.ndarray,
    raw: Dict[ChannelId, np.ndarray],
    config: PipelineConfig,
) -> tuple[np.ndarray, Dict[ChannelId, np.ndarray]]:
    """Array-valued conditioning chain; returns timestamps and per-channel envelopes."""
    config.validate()
    t_ms = np.asarray(t_ms, dtype=float)
    k = config.startup_discard
    t_out = t_ms[k:]
    env: Dict[ChannelId, np.ndarray] = {}
    for ch in CHANNELS:
        x = np.asarray(raw[ch], dtype=float)[k:]
        if x.size == 0:
            env[ch] = x
            continue
        y = bandpass_array(x, config.filter, config.fs_hz)
        y = rectify(y)
        y = moving_average(y, config.window_s, config.fs_hz)
        y = envelope_detect(y, config.fs_hz)
        env[ch] = normalize_mvc(y, config.mvc[ch], config.bias[ch])
    return t_out, env


def condition(raw: Sequence[SemgFrame], config: PipelineConfig) -> List[ConditionedSample]:
    """Full chain on a frame sequence: discard, band-pass, rectify, average,
    envelope, MVC-normalize. Deterministic; empty input gives empty output."""
    if not raw:
        return []
    t_ms = np.array([f.t_ms for f in raw])
    arrays = {ch: np.array([f.samples[ch] for f in raw]) for ch in CHANNELS}
    t_out, env = condition_arrays(t_ms, arrays, config)
    return [
        ConditionedSample(
            t_ms=float(t_out[i]), envelope={ch: float(env[ch][i]) for ch in CHANNELS}
        )
        for i in range(t_out.size)
    ]


class StreamingConditioner:
    """Per-sample/streaming version of the conditioning chain.

    Keeps independent filter state per channel; used by the live session loop.
    State resets on session reset. Matches the batch chain to float rounding.
    """

    def __init__(self, config: PipelineConfig):
        config.validate()
        self.config = config
        self._sos = config.filter.design_sos(config.fs_hz)
        self._k_env = 1.0 - math.exp(-1.0 / (config.fs_hz * ENVELOPE_TAU_S))
        self.reset()

    def reset(self) -> None:
        n_sections = self._sos.shape[0]
        self._zi = {ch: np.zeros((n_sections, 2)) for ch in CHANNELS}
        self._ma_buf = {ch: np.zeros(self.config.window_samples) for ch in CHANNELS}
        self._ma_sum = {ch: 0.0 for ch in CHANNELS}
        self._ma_count = {ch: 0 for ch in CHANNELS}
        self._ma_pos = {ch: 0 for ch in CHANNELS}
        self._env = {ch: 0.0 for ch in CHANNELS}
        self._discard_left = self.config.startup_discard

    def push_block(self, t_ms: np.ndarray, raw: Dict[ChannelId, np.ndarray]) -> tuple[np.ndarray, Dict[ChannelId, np.ndarray]]:
        """Process a contiguous block of raw samples; returns conditioned block."""
        t_ms = np.asarray(t_ms, dtype=float)
        n = t_ms.size
        skip = min(self._discard_left, n)
        self._discard_left -= skip
        t_out = t_ms[skip:]
        env_out: Dict[ChannelId, np.ndarray] = {}
        cfg = self.config
        win = cfg.window_samples
        for ch in CHANNELS:
            x = np.asarray(raw[ch], dtype=float)[skip:]
            if x.size == 0:
                env_out[ch] = x
                continue
            y, self._zi[ch] = signal.sosfilt(self._sos, x, zi=self._zi[ch])
            y = np.abs(y)
            buf = self._ma_buf[ch]
            out = np.empty_like(y)
            s = self._ma_sum[ch]
            cnt = self._ma_count[ch]
            pos = self._ma_pos[ch]
            e = self._env[ch]
            k = self._k_env
            for i in range(y.size):
                v = y[i]
                if cnt < win:
                    buf[pos] = v
                    s += v
                    cnt += 1
                else:
                    s += v - buf[pos]
                    buf[pos] = v
                pos = (pos + 1) % win
                m = s / cnt
                e += k * (m - e)
                out[i] = e
            self._ma_sum[ch] = s
            self._ma_count[ch] = cnt
            self._ma_pos[ch] = pos
            self._env[ch] = e
            env_out[ch] = np.maximum(out / cfg.mvc[ch] - cfg.bias[ch], 0.0)
        return t_out, env_out

    def push(self, frame: SemgFrame) -> ConditionedSample | None:
        """Process a single frame; None while startup samples are being discarded."""
        t, env = self.push_block(
            np.array([frame.t_ms]), {ch: np.array([frame.samples[ch]]) for ch in CHANNELS}
        )
        if t.size == 0:
            return None
        return ConditionedSample(t_ms=float(t[0]), envelope={ch: float(env[ch][0]) for ch in CHANNELS})


def frames_from_arrays(t_ms: Iterable[float], arrays: Dict[ChannelId, np.ndarray]) -> List[SemgFrame]:
    return [
        SemgFrame(t_ms=float(t), samples={ch: float(arrays[ch][i]) for ch in CHANNELS})
        for i, t in enumerate(t_ms)
    ]

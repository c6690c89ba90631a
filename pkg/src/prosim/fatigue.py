"""Muscle-fatigue detection and feed-forward stiffness compensation.

Sustained co-contraction makes the sEMG amplitude decay roughly linearly with
active time. A line fit to windowed RMS amplitude gives the decline rate; its
reciprocal is applied as a multiplicative boost on the stiffness index so the
commanded stiffness stays where the operator intends it. The position channel
is left untouched.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace
from typing import Sequence, Tuple

import numpy as np

from .errors import InsufficientDataError, SingularFitError

# Compensation saturates at 4x (line floor 0.25): the linear decline model is
# only locally valid and must not blow up as it crosses zero.
DECLINE_FLOOR = 0.25


@dataclass
class FatigueConfig:
    """Detection parameters: window length and activation threshold (MVC fraction)."""

    window_samples: int = 2000
    activation_threshold: float = 0.20

    def validate(self) -> None:
        if self.window_samples < 1:
            raise ValueError("window_samples must be >= 1")
        if not (0.0 < self.activation_threshold < 1.0):
            raise ValueError("activation_threshold must lie in (0, 1)")


@dataclass
class FatigueModel:
    """Linear amplitude decline: relative amplitude(t) = intercept + slope*t."""

    slope: float = 0.0
    intercept: float = 1.0
    r_squared: float = 1.0

    def validate(self) -> None:
        if self.intercept <= 0:
            raise ValueError("intercept must be positive")


@dataclass
class FatigueState:
    """Per-muscle compensation state owned by the control loop."""

    active: bool = False
    contraction_elapsed_s: float = 0.0
    c_fi: float = 1.0
    c_fp: float = 0.0  # position channel compensation, fixed at zero


def rms(window: Sequence[float]) -> float:
    """Root mean square of a non-empty window."""
    w = np.asarray(window, dtype=float)
    if w.size == 0:
        raise InsufficientDataError("RMS of an empty window")
    return float(np.sqrt(np.mean(w * w)))


def detect_sustained(envelope: Sequence[float], cfg: FatigueConfig) -> np.ndarray:
    """Boolean per sample: True once a full window of envelope history averages
    at or above the activation threshold."""
    cfg.validate()
    x = np.asarray(envelope, dtype=float)
    n = cfg.window_samples
    out = np.zeros(x.size, dtype=bool)
    if x.size < n:
        return out
    cs = np.concatenate(([0.0], np.cumsum(x)))
    means = (cs[n:] - cs[:-n]) / n
    out[n - 1 :] = means >= cfg.activation_threshold
    return out


def fit_fatigue(series: Sequence[Tuple[float, float]]) -> FatigueModel:
    """Least-squares line through (time_s, relative amplitude) pairs.

    A constant series is reported as a zero-slope model with r_squared = 1;
    identical timestamps raise SingularFitError.
    """
    if len(series) < 2:
        raise SingularFitError("need at least two samples")
    t = np.array([p[0] for p in series], dtype=float)
    y = np.array([p[1] for p in series], dtype=float)
    if np.ptp(t) == 0.0:
        raise SingularFitError("all timestamps identical")
    x = np.column_stack([np.ones_like(t), t])
    coef, _, _, _ = np.linalg.lstsq(x, y, rcond=None)
    intercept, slope = float(coef[0]), float(coef[1])
    resid = y - (intercept + slope * t)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    return FatigueModel(slope=slope, intercept=intercept, r_squared=r2)


def compensation_factor(model: FatigueModel, elapsed_s: float) -> float:
    """Reciprocal of the predicted relative decline, floored at 4x boost.

    The decline is normalized by the intercept so the factor is exactly 1 at
    contraction onset regardless of fit offset.
    """
    decline = 1.0 + (model.slope / model.intercept) * elapsed_s
    return 1.0 / max(decline, DECLINE_FLOOR)


def update_and_compensate(
    state: FatigueState,
    detected: bool,
    dt_s: float,
    model: FatigueModel,
    s_imcj_raw: float,
) -> Tuple[FatigueState, float]:
    """Advance the fatigue state one control tick and compensate the stiffness index.

    Active time accumulates while contraction is detected and recovers at the
    same rate when it is not, so repeated short grips do not permanently
    inflate the factor.
    """
    if dt_s <= 0:
        raise ValueError("dt_s must be positive")
    if detected:
        elapsed = state.contraction_elapsed_s + dt_s
    else:
        elapsed = max(state.contraction_elapsed_s - dt_s, 0.0)
    c_fi = compensation_factor(model, elapsed)
    new_state = replace(
        state, active=detected, contraction_elapsed_s=elapsed, c_fi=c_fi, c_fp=0.0
    )
    return new_state, c_fi * s_imcj_raw


class MuscleFatigueTracker:
    """Streaming detector + compensation state for one muscle."""

    def __init__(self, model: FatigueModel, cfg: FatigueConfig):
        cfg.validate()
        model.validate()
        self.model = model
        self.cfg = cfg
        self.reset()

    def reset(self) -> None:
        self.state = FatigueState()
        self._window: deque = deque(maxlen=self.cfg.window_samples)
        self._sum = 0.0

    def push_envelope(self, value: float) -> bool:
        """Feed one envelope sample (1 kHz side); returns current detection."""
        if len(self._window) == self._window.maxlen:
            self._sum -= self._window[0]
        self._window.append(value)
        self._sum += value
        if len(self._window) < self.cfg.window_samples:
            return False
        return self._sum / len(self._window) >= self.cfg.activation_threshold

    def step(self, detected: bool, dt_s: float) -> float:
        """Advance compensation by one control tick; returns this muscle's factor."""
        self.state, _ = update_and_compensate(self.state, detected, dt_s, self.model, 0.0)
        return self.state.c_fi


class FatigueCompensator:
    """Pairs a biceps and a triceps tracker; the applied factor is their mean.

    Fatigue is fit per muscle but the stiffness index blends both, so the
    compensation uses the mean of the per-muscle factors.
    """

    def __init__(
        self,
        biceps_model: FatigueModel | None = None,
        triceps_model: FatigueModel | None = None,
        cfg: FatigueConfig | None = None,
    ):
        cfg = cfg or FatigueConfig()
        self.biceps = MuscleFatigueTracker(biceps_model or FatigueModel(), cfg)
        self.triceps = MuscleFatigueTracker(triceps_model or FatigueModel(), cfg)

    def reset(self) -> None:
        self.biceps.reset()
        self.triceps.reset()

    def push_envelopes(self, biceps_env: float, triceps_env: float) -> None:
        self._det_b = self.biceps.push_envelope(biceps_env)
        self._det_t = self.triceps.push_envelope(triceps_env)

    def step(self, dt_s: float) -> float:
        cb = self.biceps.step(getattr(self, "_det_b", False), dt_s)
        ct = self.triceps.step(getattr(self, "_det_t", False), dt_s)
        return 0.5 * (cb + ct)

    @property
    def factor(self) -> float:
        return 0.5 * (self.biceps.state.c_fi + self.triceps.state.c_fi)

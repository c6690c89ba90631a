"""Stiffness/position reference estimation.

Joint stiffness follows the antagonist co-contraction index: torque is fit as
tau = kappa*agon - lambda*anta by least squares, and stiffness is read out as
S = |kappa|*agon + |lambda|*anta. Position references come from a clamped
differential of the trapezius/pectoralis envelopes normalized at 70% MVC.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .conditioning import CHANNELS, ChannelId, ConditionedSample
from .errors import (
    ConfigurationError,
    InsufficientDataError,
    SingularFitError,
    UndefinedCorrelationError,
)

G_DEFAULT = 9.81

# Fraction of MVC mapped to full-scale position commands; keeps sustained
# position gestures well below fatiguing effort.
POSITION_MVC_FRACTION = 0.7


@dataclass
class BiomechParams:
    """Segment masses (kg) and moment arms (m) about the chosen pivot."""

    load_kg: float = 0.0
    l_load_m: float = 0.30
    forearm_kg: float = 1.2
    l_forearm_m: float = 0.15
    hand_kg: float = 0.5
    l_hand_m: float = 0.05
    upperarm_kg: float = 0.0
    l_upperarm_m: float = 0.30
    g: float = G_DEFAULT

    def validate(self) -> None:
        for name in ("load_kg", "forearm_kg", "hand_kg", "upperarm_kg"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be >= 0")
        for name in ("l_load_m", "l_forearm_m", "l_hand_m", "l_upperarm_m"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be > 0")


class Pivot(Enum):
    WRIST = "wrist"
    ELBOW = "elbow"


def estimate_torque_elbow90(p: BiomechParams) -> float:
    """Gravitational elbow torque with the forearm horizontal at 90 degrees."""
    p.validate()
    return p.g * (p.load_kg * p.l_load_m + p.forearm_kg * p.l_forearm_m)


def estimate_torque_straight_arm(p: BiomechParams, pivot: Pivot) -> float:
    """Gravitational torque about the wrist or elbow with the arm straight and
    forward. Arms in `p` are measured from the chosen pivot."""
    p.validate()
    tau = p.g * (p.load_kg * p.l_load_m + p.hand_kg * p.l_hand_m)
    if pivot is Pivot.ELBOW:
        tau += p.g * p.forearm_kg * p.l_forearm_m
    return tau


@dataclass
class TorqueSample:
    """One calibration observation: joint torque plus normalized activations."""

    tau: float
    agon: float
    anta: float

    def __post_init__(self):
        if not (0.0 <= self.agon <= 1.0 and 0.0 <= self.anta <= 1.0):
            raise ConfigurationError("activations must lie in [0, 1]")


@dataclass
class FatigueModelParams:
    """Persisted fatigue line (see fatigue module for the fitting logic)."""

    slope_per_s: float = 0.0
    intercept: float = 1.0
    r_squared: float = 1.0


# Default per-channel bias sits just above the baseline-noise envelope ceiling
# so rest never leaks into the references (same mechanism that suppresses the
# heart-signal crosstalk).
DEFAULT_BIAS = 0.012


@dataclass
class CalibrationProfile:
    """Fitted torque/stiffness model plus the device mapping it feeds."""

    kappa: List[float] = field(default_factory=lambda: [1.8612])
    lam: List[float] = field(default_factory=lambda: [1.0])
    r_squared: float = 1.0
    rmse: float = 0.0
    mvc: Dict[ChannelId, float] = field(default_factory=lambda: {ch: 1.0 for ch in CHANNELS})
    bias: Dict[ChannelId, float] = field(default_factory=lambda: {ch: DEFAULT_BIAS for ch in CHANNELS})
    stiffness_scale: float = 4.0225
    stiffness_floor: float = 0.2275
    theta_range_rad: Tuple[float, float] = (0.0, math.pi / 2)
    fatigue: Optional[FatigueModelParams] = None

    def validate(self) -> None:
        if len(self.kappa) != len(self.lam) or not self.kappa:
            raise ConfigurationError("kappa and lambda must be same-length, non-empty lists")
        if any(k <= 0 for k in self.kappa) or any(l <= 0 for l in self.lam):
            raise ConfigurationError("kappa and lambda coefficients must be positive")
        if not (0.0 <= self.r_squared <= 1.0):
            raise ConfigurationError("r_squared must lie in [0, 1]")
        if self.stiffness_scale <= 0:
            raise ConfigurationError("stiffness_scale must be positive")

    @property
    def s_imcj_max(self) -> float:
        """Largest stiffness index attainable with all activations clamped to 1."""
        return float(sum(abs(k) for k in self.kappa) + sum(abs(l) for l in self.lam))

    def to_json_dict(self) -> dict:
        d = {
            "kappa": list(self.kappa),
            "lambda": list(self.lam),
            "r_squared": self.r_squared,
            "rmse": self.rmse,
            "mvc": {ch.value: self.mvc[ch] for ch in CHANNELS},
            "bias": {ch.value: self.bias[ch] for ch in CHANNELS},
            "stiffness_scale": self.stiffness_scale,
            "stiffness_floor": self.stiffness_floor,
            "theta_range_rad": list(self.theta_range_rad),
        }
        if self.fatigue is not None:
            d["fatigue"] = asdict(self.fatigue)
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "CalibrationProfile":
        fat = d.get("fatigue")
        profile = cls(
            kappa=[float(v) for v in d["kappa"]],
            lam=[float(v) for v in d["lambda"]],
            r_squared=float(d["r_squared"]),
            rmse=float(d["rmse"]),
            mvc={ChannelId(k): float(v) for k, v in d["mvc"].items()},
            bias={ChannelId(k): float(v) for k, v in d["bias"].items()},
            stiffness_scale=float(d["stiffness_scale"]),
            stiffness_floor=float(d["stiffness_floor"]),
            theta_range_rad=(float(d["theta_range_rad"][0]), float(d["theta_range_rad"][1])),
            fatigue=FatigueModelParams(**fat) if fat else None,
        )
        profile.validate()
        return profile

    def save(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_json_dict(), f, indent=2)

    @classmethod
    def load(cls, path) -> "CalibrationProfile":
        with open(path) as f:
            return cls.from_json_dict(json.load(f))


def fit_imcj(
    dataset: Sequence[TorqueSample],
    pin_lambda: Optional[float] = None,
    base: Optional[CalibrationProfile] = None,
) -> CalibrationProfile:
    """Least-squares fit of tau = kappa*agon - lambda*anta.

    With pin_lambda set, lambda is held fixed and only kappa is estimated
    (convenient for reporting with the antagonist coefficient normalized to 1).
    Raises SingularFitError on a rank-deficient design.
    """
    if len(dataset) < 2:
        raise SingularFitError("need at least two torque samples")
    tau = np.array([s.tau for s in dataset])
    agon = np.array([s.agon for s in dataset])
    anta = np.array([s.anta for s in dataset])

    if pin_lambda is None:
        x = np.column_stack([agon, -anta])
        # degenerate sessions (one load level, constant co-contraction) leave
        # the columns collinear up to noise; reject instead of regularizing
        sv = np.linalg.svd(x, compute_uv=False)
        if sv[0] == 0.0 or sv[-1] < 1e-2 * sv[0]:
            raise SingularFitError("agonist/antagonist columns are collinear or constant")
        coef, _, _, _ = np.linalg.lstsq(x, tau, rcond=None)
        kappa, lam = float(coef[0]), float(coef[1])
    else:
        x = agon.reshape(-1, 1)
        y = tau + pin_lambda * anta
        if float(np.linalg.norm(agon)) == 0.0:
            raise SingularFitError("agonist column is constant zero")
        coef, _, _, _ = np.linalg.lstsq(x, y, rcond=None)
        kappa, lam = float(coef[0]), float(pin_lambda)

    pred = kappa * agon - lam * anta
    resid = tau - pred
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((tau - tau.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    rmse = math.sqrt(ss_res / len(dataset))

    profile = base if base is not None else CalibrationProfile()
    profile.kappa = [kappa]
    profile.lam = [lam]
    profile.r_squared = max(0.0, min(1.0, r2))
    profile.rmse = rmse
    return profile


def estimate_stiffness(agon, anta, profile: CalibrationProfile) -> float:
    """Co-contraction stiffness index: sum_i |kappa_i|*agon_i + |lambda_i|*anta_i.

    Scalar inputs address the single biceps/triceps pair; sequences address
    multi-pair profiles. Inputs are clamped to [0, 1].
    """
    agon = np.clip(np.atleast_1d(np.asarray(agon, dtype=float)), 0.0, 1.0)
    anta = np.clip(np.atleast_1d(np.asarray(anta, dtype=float)), 0.0, 1.0)
    kap = np.abs(np.asarray(profile.kappa, dtype=float))
    lam = np.abs(np.asarray(profile.lam, dtype=float))
    if agon.size != kap.size or anta.size != lam.size:
        raise ConfigurationError("activation count must match the number of muscle pairs")
    return float(np.sum(kap * agon) + np.sum(lam * anta))


def map_stiffness_to_device(s_imcj: float, profile: CalibrationProfile) -> float:
    """Affine map from the stiffness index onto the device range; saturates at
    the index maximum so the output stays within [floor, floor+scale]."""
    frac = min(max(s_imcj, 0.0) / profile.s_imcj_max, 1.0)
    return profile.stiffness_floor + profile.stiffness_scale * frac


def estimate_position(u_trap: float, u_pect: float, theta_range: Tuple[float, float]) -> float:
    """Differential position map: trapezius closes, pectoralis opens.

    Inputs are envelopes already normalized at the position MVC fraction and
    clamped to [0, 1]; common-mode activation cancels, which is what keeps
    co-contraction from moving the hand.
    """
    theta_min, theta_max = theta_range
    x = min(max(u_trap - u_pect, 0.0), 1.0)
    return theta_min + (theta_max - theta_min) * x


def position_input(envelope_value: float, fraction: float = POSITION_MVC_FRACTION) -> float:
    """Rescale an MVC-normalized envelope to the position channel's full scale."""
    return min(max(envelope_value / fraction, 0.0), 1.0)


def estimate_ecg_bias(rest_recording: Sequence[ConditionedSample], channel: ChannelId) -> float:
    """Bias that suppresses heart-signal crosstalk: the largest envelope value
    observed on the channel while the operator is at rest."""
    if not rest_recording:
        raise InsufficientDataError("rest recording is empty")
    return max(s.envelope[channel] for s in rest_recording)


def pearson_correlation(a: Sequence[float], b: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size != b.size or a.size < 2:
        raise InsufficientDataError("series must have equal lengths >= 2")
    da = a - a.mean()
    db = b - b.mean()
    va = float(np.sum(da * da))
    vb = float(np.sum(db * db))
    if va == 0.0 or vb == 0.0:
        raise UndefinedCorrelationError("correlation undefined for zero-variance series")
    return float(np.sum(da * db) / math.sqrt(va * vb))


@dataclass
class ReferencePair:
    """Per-tick output of the estimation stage."""

    t_ms: float
    s_ref: float
    theta_ref: float
    s_imcj: float


def references_from_envelope(
    env: Dict[ChannelId, float],
    profile: CalibrationProfile,
    t_ms: float = 0.0,
    fatigue_factor: float = 1.0,
) -> ReferencePair:
    """Convert one conditioned sample into device references.

    The fatigue factor multiplies the stiffness index upstream of the device
    map; the position path never sees it.
    """
    agon = min(max(env[ChannelId.BICEPS], 0.0), 1.0)
    anta = min(max(env[ChannelId.TRICEPS], 0.0), 1.0)
    s_imcj = estimate_stiffness(agon, anta, profile)
    s_ref = map_stiffness_to_device(fatigue_factor * s_imcj, profile)
    u_trap = position_input(env[ChannelId.TRAPEZIUS])
    u_pect = position_input(env[ChannelId.PECTORALIS])
    theta_ref = estimate_position(u_trap, u_pect, profile.theta_range_rad)
    return ReferencePair(t_ms=t_ms, s_ref=s_ref, theta_ref=theta_ref, s_imcj=s_imcj)

"""Antagonist variable-stiffness actuation: reference-to-motor mapping and the
matching forward plant model.

Two motors wind tendons over an expanding-contour cam whose tension grows
quadratically with extension (F = a*x^2 + b*x). Winding both motors together
pretensions the pair and raises joint stiffness without moving the joint;
winding them differentially shifts the equilibrium without changing stiffness.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InfeasibleEquilibriumError, StiffnessInfeasibleError

# Margin added above the mechanism's minimum stiffness when clamping references.
STIFFNESS_EPS = 1e-6


@dataclass
class VsaParams:
    """Cam/pulley constants: quadratic and linear tendon-force coefficients plus
    motor and joint pulley radii."""

    a: float = 1.0e4
    b: float = 100.0
    r_m: float = 0.01
    r_j: float = 0.02

    def validate(self) -> None:
        if self.a <= 0 or self.b < 0 or self.r_m <= 0 or self.r_j <= 0:
            raise ValueError("require a > 0, b >= 0, r_m > 0, r_j > 0")

    @property
    def min_stiffness(self) -> float:
        """Joint stiffness with zero pretension: 2*b*r_j^2."""
        return 2.0 * self.b * self.r_j**2


@dataclass
class MotorCommand:
    alpha: float
    beta: float


@dataclass
class JointState:
    theta: float
    stiffness: float
    tau_load: float = 0.0


@dataclass
class PdGains:
    kp: float = 50.0
    kd: float = 1.0
    rate_hz: float = 500.0

    def validate(self) -> None:
        if self.kp <= 0 or self.kd < 0 or self.rate_hz <= 0:
            raise ValueError("require kp > 0, kd >= 0, rate_hz > 0")


def inverse_vsa(s_r: float, theta_r: float, tau_load: float, p: VsaParams) -> MotorCommand:
    """Motor angles realizing a stiffness/position reference under load.

        alpha = (s_r - 2 b r_j^2)/(4 a r_m r_j^2) + (r_j/r_m)*(tau_load/s_r - theta_r)
        beta  = (s_r - 2 b r_j^2)/(4 a r_m r_j^2) - (r_j/r_m)*(tau_load/s_r - theta_r)

    The tau_load/s_r term is zero by definition when tau_load = 0, which makes
    the zero-pretension boundary s_r = 2 b r_j^2 admissible in that case.
    """
    p.validate()
    s_min = p.min_stiffness
    if s_r < s_min or (tau_load != 0.0 and s_r <= s_min):
        raise StiffnessInfeasibleError(
            f"stiffness reference {s_r} not realizable (minimum {s_min}); clamp upstream"
        )
    common = (s_r - s_min) / (4.0 * p.a * p.r_m * p.r_j**2)
    diff = (p.r_j / p.r_m) * ((tau_load / s_r if tau_load != 0.0 else 0.0) - theta_r)
    return MotorCommand(alpha=common + diff, beta=common - diff)


def tendon_extensions(cmd: MotorCommand, theta: float, p: VsaParams) -> tuple[float, float]:
    """Tendon extensions for the routing that makes the inverse map exact:
    x1 = r_m*alpha + r_j*theta, x2 = r_m*beta - r_j*theta."""
    return p.r_m * cmd.alpha + p.r_j * theta, p.r_m * cmd.beta - p.r_j * theta


def _tendon_force(x: float, p: VsaParams) -> float:
    # Slack tendons carry no force; zero extension is the taut boundary.
    return p.a * x * x + p.b * x if x >= 0.0 else 0.0


def forward_vsa(cmd: MotorCommand, theta: float, p: VsaParams) -> tuple[float, float]:
    """Quasi-static plant model: (balanced load torque, joint stiffness) at theta.

    The returned torque is the external load the joint supports at this angle
    (the mechanism's restoring torque is its negative). While both tendons are
    taut the stiffness is 2 r_j^2 (a r_m (alpha+beta) + b), independent of
    theta; slack tendons are clamped to zero force.
    """
    p.validate()
    x1, x2 = tendon_extensions(cmd, theta, p)
    tau = p.r_j * (_tendon_force(x1, p) - _tendon_force(x2, p))
    s = 0.0
    if x1 >= 0.0:
        s += p.r_j**2 * (2.0 * p.a * x1 + p.b)
    if x2 >= 0.0:
        s += p.r_j**2 * (2.0 * p.a * x2 + p.b)
    return tau, s


def equilibrium(cmd: MotorCommand, tau_load: float, p: VsaParams) -> float:
    """Joint angle where the mechanism balances tau_load.

    Closed form in the taut regime:
        theta_eq = tau_load/S + (r_m/(2 r_j))*(beta - alpha).
    Raises InfeasibleEquilibriumError if a tendon would be slack there.
    """
    p.validate()
    s = 2.0 * p.r_j**2 * (p.a * p.r_m * (cmd.alpha + cmd.beta) + p.b)
    if s <= 0.0:
        raise InfeasibleEquilibriumError("mechanism has no stiffness at this command")
    theta_eq = tau_load / s + (p.r_m / (2.0 * p.r_j)) * (cmd.beta - cmd.alpha)
    x1, x2 = tendon_extensions(cmd, theta_eq, p)
    if x1 < 0.0 or x2 < 0.0:
        raise InfeasibleEquilibriumError(
            f"slack tendon at the equilibrium for command ({cmd.alpha}, {cmd.beta})"
        )
    return theta_eq


def pd_step(setpoint: float, angle: float, velocity: float, gains: PdGains) -> float:
    """PD law on motor position: u = kp*(setpoint - angle) - kd*velocity."""
    gains.validate()
    return gains.kp * (setpoint - angle) - gains.kd * velocity


@dataclass
class ReferenceLimits:
    """Clamp window for incoming references."""

    s_max: float = 4.25
    theta_min: float = 0.0
    theta_max: float = math.pi / 2


def clamp_references(
    s_ref: float, theta_ref: float, p: VsaParams, limits: ReferenceLimits
) -> tuple[float, float]:
    """Idempotent clamp keeping references inside the feasible window."""
    floor = p.min_stiffness + STIFFNESS_EPS
    s = min(max(s_ref, floor), max(limits.s_max, floor))
    theta = min(max(theta_ref, limits.theta_min), limits.theta_max)
    return s, theta


class MotorModel:
    """First-order velocity-limited position servo standing in for a geared DC
    motor; the physical paper-side controller treats motors as ideal servos."""

    def __init__(self, tau_s: float = 0.02, velocity_limit: float = 10.0):
        self.tau_s = tau_s
        self.velocity_limit = velocity_limit
        self.angle = 0.0
        self.velocity = 0.0

    def reset(self, angle: float = 0.0) -> None:
        self.angle = angle
        self.velocity = 0.0

    def step(self, target: float, dt_s: float) -> float:
        v = (target - self.angle) / self.tau_s
        v = max(-self.velocity_limit, min(self.velocity_limit, v))
        self.velocity = v
        self.angle += v * dt_s
        return self.angle


def simulate_pd_servo(
    setpoint: float,
    gains: PdGains,
    duration_s: float,
    tau_s: float = 0.02,
    velocity_limit: float = 10.0,
):
    """Step response of a PD-driven first-order servo; returns (t, angle) arrays.

    Used to exercise the PD loop at its control rate; the actuation output
    drives the velocity state through the motor lag.
    """
    import numpy as np

    gains.validate()
    dt = 1.0 / gains.rate_hz
    n = int(round(duration_s / dt))
    t = np.arange(1, n + 1) * dt
    angle = 0.0
    velocity = 0.0
    out = np.empty(n)
    for i in range(n):
        u = pd_step(setpoint, angle, velocity, gains)
        velocity += dt * (u - velocity) / tau_s
        velocity = max(-velocity_limit, min(velocity_limit, velocity))
        angle += dt * velocity
        out[i] = angle
    return t, out

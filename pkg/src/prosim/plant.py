"""Simulated underactuated compliant finger driven by the antagonist VSA.

The finger bank is lumped into a single flexion coordinate. Quasi-static
equilibrium balances the tendon mechanism against external tip forces and a
unilateral object spring; grasp outcomes (holding/crushed/slipped) follow from
force thresholds of the virtual object.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .vsa import MotorCommand, MotorModel, VsaParams, forward_vsa, tendon_extensions

MM_PER_M = 1000.0

# Grasp state machine timing: contact must persist before it counts as a grip,
# and slip is judged once the quasi-static force has settled.
CONTACT_FORCE_EPS = 0.02
HOLD_GRACE_S = 0.3
SLIP_EVAL_DELAY_S = 1.0


@dataclass
class FingerModel:
    """Lumped finger: tip lever arm, flexion range, and the tip-stiffness gain.

    The quasi-static geometry fixes tip_gain = 1/(1000 * tip_radius^2)
    ((N/mm) per (N*m/rad)); the field exists so stiffness levels can be planned
    in fingertip units.
    """

    tip_radius_m: float = 0.05
    theta_range_rad: Tuple[float, float] = (0.0, math.pi / 2)
    tip_gain: float = field(default=0.0)

    def __post_init__(self):
        if self.tip_radius_m <= 0:
            raise ValueError("tip_radius_m must be positive")
        if self.tip_gain <= 0.0:
            self.tip_gain = 1.0 / (MM_PER_M * self.tip_radius_m**2)

    def stiffness_for_tip_slope(self, k_n_per_mm: float) -> float:
        """Device joint stiffness producing a given fingertip slope."""
        return k_n_per_mm / self.tip_gain

    def device_range_for_tip_slopes(self, low: float, high: float) -> Tuple[float, float]:
        """(floor, scale) of the device stiffness map hitting fingertip slopes
        low..high at the range endpoints."""
        floor = self.stiffness_for_tip_slope(low)
        return floor, self.stiffness_for_tip_slope(high) - floor


class ObjectKind(Enum):
    SPONGE = "sponge"
    RAW_EGG = "egg"
    RIGID_BLOCK = "rigid_block"
    FREE = "free"


@dataclass
class ObjectModel:
    """Virtual object: unilateral surface spring plus break/slip force thresholds."""

    kind: ObjectKind
    surface_stiffness_n_per_mm: float = 0.0
    break_force_n: float = math.inf
    slip_force_n: float = 0.0
    contact_theta_rad: float = math.pi / 6

    def validate(self) -> None:
        if self.break_force_n <= 0:
            raise ValueError("break_force_n must be positive")
        if self.slip_force_n < 0:
            raise ValueError("slip_force_n must be >= 0")


OBJECT_CATALOG: Dict[str, ObjectModel] = {
    "sponge": ObjectModel(ObjectKind.SPONGE, surface_stiffness_n_per_mm=0.05, slip_force_n=0.2),
    "egg": ObjectModel(
        ObjectKind.RAW_EGG, surface_stiffness_n_per_mm=5.0, break_force_n=5.0, slip_force_n=0.5
    ),
    "rigid_block": ObjectModel(
        ObjectKind.RIGID_BLOCK, surface_stiffness_n_per_mm=50.0, slip_force_n=2.0
    ),
    "free": ObjectModel(ObjectKind.FREE),
}


class GraspState(Enum):
    NONE = "none"
    HOLDING = "holding"
    CRUSHED = "crushed"
    SLIPPED = "slipped"


@dataclass
class PlantState:
    """Snapshot of the simulated hand."""

    t_s: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0
    alpha_vel: float = 0.0
    beta_vel: float = 0.0
    theta: float = 0.0
    fingertip_force_n: float = 0.0
    grasp: GraspState = GraspState.NONE


class HandPlant:
    """Quasi-static finger plant stepped by exactly one simulation loop."""

    def __init__(
        self,
        vsa: VsaParams,
        finger: FingerModel,
        obj: Optional[ObjectModel] = None,
        motor_tau_s: float = 0.02,
        motor_velocity_limit: float = 10.0,
    ):
        vsa.validate()
        self.vsa = vsa
        self.finger = finger
        self._motor_a = MotorModel(motor_tau_s, motor_velocity_limit)
        self._motor_b = MotorModel(motor_tau_s, motor_velocity_limit)
        self.set_object(obj)
        self.reset()

    def set_object(self, obj: Optional[ObjectModel]) -> None:
        if obj is not None and obj.kind is not ObjectKind.FREE:
            obj.validate()
            self.obj = obj
        else:
            self.obj = None

    def reset(self, cmd: Optional[MotorCommand] = None) -> None:
        """Return to rest (or pin the motors at a command for quasi-static runs)."""
        start = cmd or MotorCommand(0.0, 0.0)
        self._motor_a.reset(start.alpha)
        self._motor_b.reset(start.beta)
        self.state = PlantState(alpha=start.alpha, beta=start.beta)
        self._contact_since: Optional[float] = None
        self._slip_evaluated = False
        self._settle_theta(0.0)

    def _object_joint_stiffness(self) -> float:
        if self.obj is None:
            return 0.0
        return MM_PER_M * self.obj.surface_stiffness_n_per_mm * self.finger.tip_radius_m**2

    def _equilibrium_theta(self, cmd: MotorCommand, ext_torque: float) -> float:
        """Solve tau_balance(theta) + K_obj*max(theta - theta_obj, 0) = ext_torque.

        The taut closed form is tried first; slack corner cases fall back to
        bisection on the monotone residual.
        """
        p = self.vsa
        s = 2.0 * p.r_j**2 * (p.a * p.r_m * (cmd.alpha + cmd.beta) + p.b)
        theta0 = (p.r_m / (2.0 * p.r_j)) * (cmd.beta - cmd.alpha)
        k_obj = self._object_joint_stiffness()
        theta_obj = self.obj.contact_theta_rad if self.obj is not None else math.inf

        if s > 0.0:
            cand = theta0 + ext_torque / s
            if cand > theta_obj and k_obj > 0.0:
                cand = (s * theta0 + ext_torque + k_obj * theta_obj) / (s + k_obj)
            x1, x2 = tendon_extensions(cmd, cand, p)
            if x1 >= 0.0 and x2 >= 0.0:
                return cand
        return self._bisect_theta(cmd, ext_torque, k_obj, theta_obj)

    def _bisect_theta(self, cmd, ext_torque, k_obj, theta_obj) -> float:
        def residual(theta: float) -> float:
            tau, _ = forward_vsa(cmd, theta, self.vsa)
            contact = k_obj * max(theta - theta_obj, 0.0)
            return tau + contact - ext_torque

        lo, hi = self.finger.theta_range_rad[0] - 2.0, self.finger.theta_range_rad[1] + 2.0
        if residual(lo) > 0.0:
            return lo
        if residual(hi) < 0.0:
            return hi
        for _ in range(90):
            mid = 0.5 * (lo + hi)
            if residual(mid) <= 0.0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def _settle_theta(self, external_tip_force_n: float) -> None:
        cmd = MotorCommand(self._motor_a.angle, self._motor_b.angle)
        ext_torque = external_tip_force_n * self.finger.tip_radius_m
        theta = self._equilibrium_theta(cmd, ext_torque)
        lo, hi = self.finger.theta_range_rad
        theta = min(max(theta, lo), hi)
        force = 0.0
        if self.obj is not None and theta > self.obj.contact_theta_rad:
            pen_mm = (theta - self.obj.contact_theta_rad) * self.finger.tip_radius_m * MM_PER_M
            force = self.obj.surface_stiffness_n_per_mm * pen_mm
        self.state = replace(self.state, theta=theta, fingertip_force_n=force)

    def _update_grasp(self, t_s: float) -> None:
        if self.obj is None:
            return
        st = self.state
        if st.grasp in (GraspState.CRUSHED, GraspState.SLIPPED):
            return
        force = st.fingertip_force_n
        if force > CONTACT_FORCE_EPS:
            if self._contact_since is None:
                self._contact_since = t_s
        else:
            if st.grasp is GraspState.NONE:
                self._contact_since = None
        if st.grasp is GraspState.NONE and self._contact_since is not None:
            if force >= self.obj.slip_force_n or t_s - self._contact_since >= HOLD_GRACE_S:
                self.state = replace(st, grasp=GraspState.HOLDING)
                st = self.state
        if st.grasp is GraspState.HOLDING:
            if force > self.obj.break_force_n:
                self.state = replace(st, grasp=GraspState.CRUSHED)
            elif (
                not self._slip_evaluated
                and self._contact_since is not None
                and t_s - self._contact_since >= SLIP_EVAL_DELAY_S
            ):
                self._slip_evaluated = True
                if force < self.obj.slip_force_n:
                    self.state = replace(st, grasp=GraspState.SLIPPED)

    def step(self, cmd: MotorCommand, external_tip_force_n: float, dt_s: float) -> PlantState:
        """Advance one control tick: motor dynamics, finger equilibrium, grasp status."""
        if not (0.0 < dt_s <= 0.01):
            raise ValueError("dt_s must lie in (0, 0.01]")
        t_s = self.state.t_s + dt_s
        self._motor_a.step(cmd.alpha, dt_s)
        self._motor_b.step(cmd.beta, dt_s)
        self.state = replace(
            self.state,
            t_s=t_s,
            alpha=self._motor_a.angle,
            beta=self._motor_b.angle,
            alpha_vel=self._motor_a.velocity,
            beta_vel=self._motor_b.velocity,
        )
        self._settle_theta(external_tip_force_n)
        self._update_grasp(t_s)
        return self.state

    def achieved_stiffness(self) -> float:
        """Model stiffness at the current motor angles and pose."""
        cmd = MotorCommand(self._motor_a.angle, self._motor_b.angle)
        _, s = forward_vsa(cmd, self.state.theta, self.vsa)
        return s


def step_plant(
    plant: HandPlant, cmd: MotorCommand, external_tip_force_n: float, dt_s: float
) -> PlantState:
    """Functional wrapper over HandPlant.step."""
    return plant.step(cmd, external_tip_force_n, dt_s)


@dataclass
class ProbeProfile:
    """External tip-force program used by the characterization harness.

    "ramp" grows linearly to peak_n over the whole duration; "constant" ramps
    up during the first quarter and then holds, approximating a suddenly
    applied steady force without a discontinuity.
    """

    kind: str = "ramp"  # "ramp" or "constant"
    peak_n: float = 3.0
    duration_s: float = 5.0

    def force_at(self, t_s: float) -> float:
        rise = self.duration_s if self.kind == "ramp" else self.duration_s / 4.0
        return self.peak_n * min(t_s / rise, 1.0)


@dataclass
class CharacterizationResult:
    """One fitted force-deflection line."""

    commanded_level: float
    slope_n_per_mm: float
    r_squared: float
    deflection_mm: np.ndarray
    force_n: np.ndarray
    flag: Optional[str] = None


def _fit_line(deflection_mm: np.ndarray, force_n: np.ndarray) -> Tuple[float, float]:
    x = np.column_stack([deflection_mm, np.ones_like(deflection_mm)])
    coef, _, _, _ = np.linalg.lstsq(x, force_n, rcond=None)
    pred = x @ coef
    ss_res = float(np.sum((force_n - pred) ** 2))
    ss_tot = float(np.sum((force_n - force_n.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(coef[0]), r2


def _run_probe(
    plant: HandPlant,
    cmd: MotorCommand,
    probe: ProbeProfile,
    dt_s: float,
    noise_sigma: float,
    rng: Optional[np.random.Generator],
) -> CharacterizationResult:
    """Pin the motors at a command, apply the probe in the flexion direction,
    and fit force against tip deflection from the unloaded equilibrium."""
    plant.set_object(None)
    plant.reset(cmd=cmd)
    theta_rest = plant.state.theta
    hi = plant.finger.theta_range_rad[1]
    n = int(round(probe.duration_s / dt_s))
    deflection = np.empty(n)
    force = np.empty(n)
    truncated = False
    for i in range(n):
        f = probe.force_at((i + 1) * dt_s)
        st = plant.step(cmd, f, dt_s)
        if st.theta >= hi:
            truncated = True
        deflection[i] = (st.theta - theta_rest) * plant.finger.tip_radius_m * MM_PER_M
        force[i] = f
    if rng is not None and noise_sigma > 0.0:
        scale = max(float(deflection.max()), 1e-9)
        deflection = deflection + rng.normal(0.0, noise_sigma * scale, deflection.size)
    if n == 0 or force.max() <= 0.0:
        return CharacterizationResult(0.0, 0.0, 0.0, deflection, force, flag="empty_sweep")
    slope, r2 = _fit_line(deflection, force)
    return CharacterizationResult(
        0.0, slope, r2, deflection, force, flag="truncated" if truncated else None
    )


def characterize_stiffness(
    vsa: VsaParams,
    finger: FingerModel,
    levels: Sequence[float],
    probe: Optional[ProbeProfile] = None,
    dt_s: float = 0.002,
    noise_sigma: float = 0.0,
    rng: Optional[np.random.Generator] = None,
) -> List[CharacterizationResult]:
    """Hold position at zero, command each stiffness level, ramp a flexing tip
    force, and fit force against tip deflection."""
    from .vsa import inverse_vsa

    probe = probe or ProbeProfile("ramp", 3.0, 5.0)
    plant = HandPlant(vsa, finger)
    results = []
    for level in levels:
        cmd = inverse_vsa(level, 0.0, 0.0, vsa)
        res = _run_probe(plant, cmd, probe, dt_s, noise_sigma, rng)
        res.commanded_level = level
        results.append(res)
    return results


def characterize_position(
    vsa: VsaParams,
    finger: FingerModel,
    positions_rad: Sequence[float],
    hold_stiffness: float,
    probe: Optional[ProbeProfile] = None,
    dt_s: float = 0.002,
    noise_sigma: float = 0.0,
    rng: Optional[np.random.Generator] = None,
) -> List[CharacterizationResult]:
    """Hold a constant stiffness level at several positions and measure the
    deflection under a constant tip force.

    The probe pushes in the flexion direction so the sweep is not eaten by the
    extension stop at zero flexion; the slope magnitude is unaffected.
    """
    from .vsa import inverse_vsa

    probe = probe or ProbeProfile("constant", 1.0, 2.0)
    plant = HandPlant(vsa, finger)
    results = []
    for pos in positions_rad:
        cmd = inverse_vsa(hold_stiffness, pos, 0.0, vsa)
        res = _run_probe(plant, cmd, probe, dt_s, noise_sigma, rng)
        res.commanded_level = pos
        results.append(res)
    return results

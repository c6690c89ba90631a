"""End-to-end control chain: envelopes -> references -> fatigue -> motor
commands -> plant, stepped at 500 Hz against a 1 kHz signal stream.

Used three ways: scripted grasp simulation (batch-conditioned envelopes), the
live websocket session (streaming synth + conditioner), and tests.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

from .conditioning import (
    CHANNELS,
    ChannelId,
    PipelineConfig,
    StreamingConditioner,
    condition_arrays,
)
from .config import RunConfig, default_run_config
from .errors import ConfigurationError
from .estimation import CalibrationProfile, references_from_envelope
from .fatigue import FatigueCompensator, FatigueModel
from .plant import (
    OBJECT_CATALOG,
    GraspState,
    HandPlant,
    ObjectModel,
)
from .synth import ActivationProfile, ArtifactSpec, Segment, StreamingSynth, generate_arrays
from .vsa import ReferenceLimits, clamp_references, inverse_vsa

SIGNAL_PER_CONTROL = 2  # 1 kHz signal, 500 Hz control


def pipeline_with_profile(pipeline: PipelineConfig, profile: CalibrationProfile) -> PipelineConfig:
    """Conditioning config with the calibration's MVC and bias folded in."""
    return replace(pipeline, mvc=dict(profile.mvc), bias=dict(profile.bias))


@dataclass
class TelemetrySample:
    """One control-rate snapshot of the whole chain."""

    t_s: float
    theta: float
    theta_ref: float
    s: float
    s_ref: float
    alpha: float
    beta: float
    fingertip_force: float
    grasp: str
    fatigue_factor: float

    def to_dict(self) -> dict:
        return {
            "t": round(self.t_s, 6),
            "theta": self.theta,
            "theta_ref": self.theta_ref,
            "s": self.s,
            "s_ref": self.s_ref,
            "alpha": self.alpha,
            "beta": self.beta,
            "fingertip_force": self.fingertip_force,
            "grasp": self.grasp,
            "fatigue_factor": self.fatigue_factor,
        }


class ControlChain:
    """Reference estimation + fatigue + inverse map + plant, fed one envelope
    sample per control tick."""

    def __init__(
        self,
        config: RunConfig,
        profile: CalibrationProfile,
        obj: Optional[ObjectModel] = None,
    ):
        self.config = config
        self.profile = profile
        fat = profile.fatigue
        model = (
            FatigueModel(slope=fat.slope_per_s, intercept=fat.intercept, r_squared=fat.r_squared)
            if fat
            else FatigueModel()
        )
        self.compensator = FatigueCompensator(model, model, config.fatigue)
        self.limits = ReferenceLimits(
            s_max=profile.stiffness_floor + profile.stiffness_scale,
            theta_min=profile.theta_range_rad[0],
            theta_max=profile.theta_range_rad[1],
        )
        self.plant = HandPlant(
            config.vsa,
            config.finger,
            obj,
            motor_tau_s=config.motor.tau_s,
            motor_velocity_limit=config.motor.velocity_limit,
        )
        self.dt_ctrl = SIGNAL_PER_CONTROL / config.pipeline.fs_hz
        self.t_s = 0.0

    def reset(self, obj: Optional[ObjectModel] = None) -> None:
        self.compensator.reset()
        self.plant.set_object(obj)
        self.plant.reset()
        self.t_s = 0.0

    def tick(
        self,
        envelope: Dict[ChannelId, float],
        detector_pairs: Optional[List[tuple]] = None,
        external_tip_force: float = 0.0,
    ) -> TelemetrySample:
        """One 500 Hz control step given the latest conditioned envelope sample.

        detector_pairs carries the (biceps, triceps) envelope samples produced
        since the last tick so fatigue detection runs at the full signal rate.
        """
        pairs = detector_pairs or [
            (envelope[ChannelId.BICEPS], envelope[ChannelId.TRICEPS])
        ]
        for b_env, t_env in pairs:
            self.compensator.push_envelopes(b_env, t_env)
        c_fi = self.compensator.step(self.dt_ctrl)
        refs = references_from_envelope(
            envelope, self.profile, t_ms=self.t_s * 1000.0, fatigue_factor=c_fi
        )
        s_cmd, theta_cmd = clamp_references(
            refs.s_ref, refs.theta_ref, self.config.vsa, self.limits
        )
        cmd = inverse_vsa(s_cmd, theta_cmd, 0.0, self.config.vsa)
        st = self.plant.step(cmd, external_tip_force, self.dt_ctrl)
        self.t_s = st.t_s
        return TelemetrySample(
            t_s=st.t_s,
            theta=st.theta,
            theta_ref=theta_cmd,
            s=self.plant.achieved_stiffness(),
            s_ref=s_cmd,
            alpha=st.alpha,
            beta=st.beta,
            fingertip_force=st.fingertip_force_n,
            grasp=st.grasp.value,
            fatigue_factor=c_fi,
        )


@dataclass
class GraspScenario:
    """A scripted trial: which object, what the operator does, how long."""

    object_name: str
    script: ActivationProfile
    artifacts: ArtifactSpec = field(default_factory=ArtifactSpec)

    def object_model(self) -> Optional[ObjectModel]:
        if self.object_name not in OBJECT_CATALOG:
            raise ConfigurationError(f"unknown scenario object: {self.object_name}")
        obj = OBJECT_CATALOG[self.object_name]
        return None if obj.kind.value == "free" else obj


@dataclass
class TrialRecord:
    """Outcome plus the full control-rate telemetry log of one scripted trial."""

    outcome: str
    peak_force_n: float
    telemetry: List[TelemetrySample]

    def summary(self) -> dict:
        return {
            "outcome": self.outcome,
            "peak_force_n": self.peak_force_n,
            "duration_s": self.telemetry[-1].t_s if self.telemetry else 0.0,
            "ticks": len(self.telemetry),
        }


def simulate_grasp(
    scenario: GraspScenario,
    config: Optional[RunConfig] = None,
    profile: Optional[CalibrationProfile] = None,
) -> TrialRecord:
    """Run the full chain over a scripted activation profile.

    The raw stream is synthesized and conditioned in one batch (the script is
    known ahead of time), then the 500 Hz control loop consumes every second
    envelope sample. Deterministic for a fixed scenario seed.
    """
    config = config or default_run_config()
    profile = profile or CalibrationProfile()
    t_ms, raw = generate_arrays(
        scenario.script, scenario.artifacts, config.pipeline.fs_hz, profile.mvc
    )
    _, env = condition_arrays(t_ms, raw, pipeline_with_profile(config.pipeline, profile))
    chain = ControlChain(config, profile, scenario.object_model())
    telemetry: List[TelemetrySample] = []
    n = min(e.size for e in env.values()) if env else 0
    peak = 0.0
    b_env = env.get(ChannelId.BICEPS)
    t_env = env.get(ChannelId.TRICEPS)
    for i in range(SIGNAL_PER_CONTROL - 1, n, SIGNAL_PER_CONTROL):
        sample = {ch: float(env[ch][i]) for ch in CHANNELS}
        pairs = [
            (float(b_env[j]), float(t_env[j]))
            for j in range(i - SIGNAL_PER_CONTROL + 1, i + 1)
        ]
        ts = chain.tick(sample, detector_pairs=pairs)
        telemetry.append(ts)
        peak = max(peak, ts.fingertip_force)
    outcome = telemetry[-1].grasp if telemetry else GraspState.NONE.value
    return TrialRecord(outcome=outcome, peak_force_n=peak, telemetry=telemetry)


class LiveSession:
    """Streaming variant for the real-time server: synthesizes and conditions
    the signal tick by tick from the latest held activation command.

    All state is owned by this object; the network layer only exchanges
    immutable messages with it. Stepping is in simulated time, so replaying a
    recorded command schedule with the same seed reproduces the telemetry.
    """

    # After a disconnect the last command is held briefly, then decays to rest:
    # a frozen high-stiffness grip is the unsafe default.
    HOLD_S = 1.0
    DECAY_S = 1.0

    def __init__(
        self,
        config: Optional[RunConfig] = None,
        profile: Optional[CalibrationProfile] = None,
        seed: int = 0,
        telemetry_divisor: int = 10,
    ):
        self.config = config or default_run_config()
        self.profile = profile or CalibrationProfile()
        artifacts = ArtifactSpec(seed=seed)
        self.synth = StreamingSynth(artifacts, self.config.pipeline.fs_hz, self.profile.mvc)
        self.conditioner = StreamingConditioner(
            pipeline_with_profile(self.config.pipeline, self.profile)
        )
        self.chain = ControlChain(self.config, self.profile, None)
        self.telemetry_divisor = telemetry_divisor
        self._tick_count = 0
        self._last_env: Dict[ChannelId, float] = {ch: 0.0 for ch in CHANNELS}
        self._last_command_t_ms: Optional[float] = None
        self._held_command: Dict[ChannelId, float] = {ch: 0.0 for ch in CHANNELS}
        self._disconnect_elapsed: Optional[float] = None

    @property
    def sim_time_s(self) -> float:
        return self.chain.t_s

    def apply_command(self, t_ms: float, levels: Dict[ChannelId, float]) -> bool:
        """Apply an activation command; stale commands are ignored."""
        if self._last_command_t_ms is not None and t_ms < self._last_command_t_ms:
            return False
        self._last_command_t_ms = t_ms
        self._held_command = {
            ch: min(max(float(levels.get(ch, 0.0)), 0.0), 1.0) for ch in CHANNELS
        }
        self._disconnect_elapsed = None
        self.synth.set_activation(self._held_command)
        return True

    def select_scenario(self, name: str) -> None:
        if name not in OBJECT_CATALOG:
            raise ConfigurationError(f"unknown scenario: {name}")
        obj = OBJECT_CATALOG[name]
        self.chain.plant.set_object(None if obj.kind.value == "free" else obj)
        self.chain.plant.reset()

    def reset(self) -> None:
        """Plant to rest, fatigue state cleared; the signal chain keeps running."""
        self.chain.compensator.reset()
        self.chain.plant.reset()

    def connection_lost(self) -> None:
        self._disconnect_elapsed = 0.0

    def _apply_disconnect_policy(self, dt: float) -> None:
        if self._disconnect_elapsed is None:
            return
        self._disconnect_elapsed += dt
        over = self._disconnect_elapsed - self.HOLD_S
        if over <= 0.0:
            return
        decay = max(0.0, 1.0 - over / self.DECAY_S)
        self.synth.set_activation({ch: u * decay for ch, u in self._held_command.items()})

    def tick(self) -> Optional[TelemetrySample]:
        """Advance one control period (two signal samples); returns telemetry
        on decimated ticks (default every 10th -> 50 Hz)."""
        self._apply_disconnect_policy(self.chain.dt_ctrl)
        t_ms, raw = self.synth.next_block(SIGNAL_PER_CONTROL)
        t_out, env = self.conditioner.push_block(t_ms, raw)
        pairs = None
        if t_out.size:
            self._last_env = {ch: float(env[ch][-1]) for ch in CHANNELS}
            pairs = list(
                zip(
                    (float(v) for v in env[ChannelId.BICEPS]),
                    (float(v) for v in env[ChannelId.TRICEPS]),
                )
            )
        ts = self.chain.tick(self._last_env, detector_pairs=pairs)
        self._tick_count += 1
        if self._tick_count % self.telemetry_divisor == 0:
            return ts
        return None

    def run_ticks(self, n: int) -> List[TelemetrySample]:
        out = []
        for _ in range(n):
            ts = self.tick()
            if ts is not None:
                out.append(ts)
        return out


def gentle_egg_script() -> GraspScenario:
    """Light co-contraction, partial closure: holds a raw egg without breaking it."""
    prof = ActivationProfile(
        duration_s=8.0,
        segments={
            ChannelId.BICEPS: [Segment(0.5, 8.0, 0.05)],
            ChannelId.TRICEPS: [Segment(0.5, 8.0, 0.05)],
            ChannelId.TRAPEZIUS: [Segment(1.0, 8.0, 0.35)],
        },
    )
    return GraspScenario("egg", prof, ArtifactSpec(seed=11))


def crush_egg_script() -> GraspScenario:
    """Maximum co-contraction and full closure: breaks the egg."""
    prof = ActivationProfile(
        duration_s=8.0,
        segments={
            ChannelId.BICEPS: [Segment(0.5, 8.0, 0.9)],
            ChannelId.TRICEPS: [Segment(0.5, 8.0, 0.9)],
            ChannelId.TRAPEZIUS: [Segment(1.0, 8.0, 0.7)],
        },
    )
    return GraspScenario("egg", prof, ArtifactSpec(seed=12))


def shallow_rigid_script() -> GraspScenario:
    """Minimum stiffness, shallow closure on a rigid block: grip force stays
    below the slip threshold."""
    prof = ActivationProfile(
        duration_s=8.0,
        segments={ChannelId.TRAPEZIUS: [Segment(1.0, 8.0, 0.27)]},
    )
    return GraspScenario("rigid_block", prof, ArtifactSpec(seed=13))


def free_tracking_script() -> GraspScenario:
    """No object: pure position/stiffness tracking."""
    prof = ActivationProfile(
        duration_s=6.0,
        segments={
            ChannelId.TRAPEZIUS: [Segment(1.0, 4.0, 0.4)],
            ChannelId.BICEPS: [Segment(2.0, 5.0, 0.3)],
            ChannelId.TRICEPS: [Segment(2.0, 5.0, 0.3)],
        },
    )
    return GraspScenario("free", prof, ArtifactSpec(seed=14))


BUILTIN_SCRIPTS = {
    "gentle": gentle_egg_script,
    "crush": crush_egg_script,
    "shallow": shallow_rigid_script,
    "free": free_tracking_script,
}

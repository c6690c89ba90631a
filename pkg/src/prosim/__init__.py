"""sEMG tele-impedance interface and variable-stiffness hand prosthesis simulator."""

from .conditioning import (
    CHANNELS,
    ChannelId,
    ConditionedSample,
    FilterSpec,
    PipelineConfig,
    SemgFrame,
    StreamingConditioner,
    condition,
)
from .estimation import (
    BiomechParams,
    CalibrationProfile,
    Pivot,
    ReferencePair,
    TorqueSample,
    estimate_position,
    estimate_stiffness,
    estimate_torque_elbow90,
    estimate_torque_straight_arm,
    fit_imcj,
    map_stiffness_to_device,
    pearson_correlation,
)
from .fatigue import (
    FatigueConfig,
    FatigueModel,
    FatigueState,
    detect_sustained,
    fit_fatigue,
    rms,
    update_and_compensate,
)
from .plant import (
    FingerModel,
    GraspState,
    HandPlant,
    ObjectKind,
    ObjectModel,
    characterize_position,
    characterize_stiffness,
)
from .session import GraspScenario, LiveSession, TrialRecord, simulate_grasp
from .synth import ActivationProfile, ArtifactSpec, Segment, generate
from .vsa import (
    MotorCommand,
    PdGains,
    VsaParams,
    clamp_references,
    equilibrium,
    forward_vsa,
    inverse_vsa,
    pd_step,
)

__version__ = "0.1.0"

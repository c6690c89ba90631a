"""Run configuration: one file describing the pipeline, actuator, controller,
fatigue detection, and finger model. JSON and TOML are accepted; unknown keys
are rejected so typos fail loudly."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .conditioning import CHANNELS, ChannelId, FilterSpec, PipelineConfig
from .errors import ConfigurationError
from .fatigue import FatigueConfig
from .plant import FingerModel
from .vsa import PdGains, VsaParams

ENV_CONFIG = "PROSIM_CONFIG"


@dataclass
class MotorConfig:
    tau_s: float = 0.02
    velocity_limit: float = 10.0


@dataclass
class RunConfig:
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    vsa: VsaParams = field(default_factory=lambda: VsaParams(a=2500.0, b=100.0, r_m=0.1, r_j=0.02))
    pd: PdGains = field(default_factory=PdGains)
    fatigue: FatigueConfig = field(default_factory=FatigueConfig)
    finger: FingerModel = field(default_factory=FingerModel)
    motor: MotorConfig = field(default_factory=MotorConfig)
    out_dir: str = "out"

    def validate(self) -> None:
        self.pipeline.validate()
        self.vsa.validate()
        self.pd.validate()
        self.fatigue.validate()


def default_run_config() -> RunConfig:
    """Simulation defaults.

    The hand-side actuator constants differ from the bare VsaParams defaults:
    a gentler cam (a=2500) keeps both tendons taut across the full probe force
    and closure range, and a larger motor pulley (r_m=0.1) keeps motor travel
    for the top stiffness level within about a second at the velocity limit.
    """
    return RunConfig()


_SECTION_KEYS = {
    "pipeline": {"fs_hz", "window_s", "startup_discard", "low_cut_hz", "high_cut_hz", "order", "mvc", "bias"},
    "vsa": {"a", "b", "r_m", "r_j"},
    "pd": {"kp", "kd", "rate_hz"},
    "fatigue": {"window_samples", "activation_threshold"},
    "finger": {"tip_radius_m", "theta_range_rad", "tip_gain"},
    "motor": {"tau_s", "velocity_limit"},
    "paths": {"out_dir"},
}


def _check_keys(section: str, data: dict) -> None:
    unknown = set(data) - _SECTION_KEYS[section]
    if unknown:
        raise ConfigurationError(f"unknown keys in [{section}]: {sorted(unknown)}")


def _channel_map(d: dict, default: float) -> dict:
    out = {ch: default for ch in CHANNELS}
    for k, v in d.items():
        out[ChannelId(k)] = float(v)
    return out


def run_config_from_dict(data: dict) -> RunConfig:
    unknown = set(data) - set(_SECTION_KEYS)
    if unknown:
        raise ConfigurationError(f"unknown config sections: {sorted(unknown)}")
    cfg = default_run_config()

    pl = data.get("pipeline", {})
    _check_keys("pipeline", pl)
    cfg.pipeline = PipelineConfig(
        fs_hz=float(pl.get("fs_hz", 1000.0)),
        filter=FilterSpec(
            low_cut_hz=float(pl.get("low_cut_hz", 20.0)),
            high_cut_hz=float(pl.get("high_cut_hz", 450.0)),
            order=int(pl.get("order", 4)),
        ),
        window_s=float(pl.get("window_s", 0.5)),
        startup_discard=int(pl.get("startup_discard", 500)),
        mvc=_channel_map(pl.get("mvc", {}), 1.0),
        bias=_channel_map(pl.get("bias", {}), 0.0),
    )
    if "vsa" in data:
        _check_keys("vsa", data["vsa"])
        cfg.vsa = VsaParams(**{k: float(v) for k, v in data["vsa"].items()})
    if "pd" in data:
        _check_keys("pd", data["pd"])
        cfg.pd = PdGains(**{k: float(v) for k, v in data["pd"].items()})
    if "fatigue" in data:
        _check_keys("fatigue", data["fatigue"])
        f = data["fatigue"]
        cfg.fatigue = FatigueConfig(
            window_samples=int(f.get("window_samples", 2000)),
            activation_threshold=float(f.get("activation_threshold", 0.20)),
        )
    if "finger" in data:
        _check_keys("finger", data["finger"])
        f = data["finger"]
        cfg.finger = FingerModel(
            tip_radius_m=float(f.get("tip_radius_m", 0.05)),
            theta_range_rad=tuple(f.get("theta_range_rad", (0.0, 1.5707963267948966))),
            tip_gain=float(f.get("tip_gain", 0.0)),
        )
    if "motor" in data:
        _check_keys("motor", data["motor"])
        m = data["motor"]
        cfg.motor = MotorConfig(
            tau_s=float(m.get("tau_s", 0.02)),
            velocity_limit=float(m.get("velocity_limit", 10.0)),
        )
    if "paths" in data:
        _check_keys("paths", data["paths"])
        cfg.out_dir = str(data["paths"].get("out_dir", "out"))
    cfg.validate()
    return cfg


def load_run_config(path: Optional[str] = None) -> RunConfig:
    """Load a config file (JSON or TOML by extension); falls back to the
    PROSIM_CONFIG environment variable, then to defaults."""
    if path is None:
        path = os.environ.get(ENV_CONFIG)
    if path is None:
        return default_run_config()
    p = Path(path)
    if not p.exists():
        raise ConfigurationError(f"config file not found: {path}")
    if p.suffix.lower() == ".toml":
        try:
            import tomllib  # Python >= 3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        with open(p, "rb") as f:
            data = tomllib.load(f)
    else:
        with open(p) as f:
            data = json.load(f)
    return run_config_from_dict(data)

"""CSV/JSON/JSONL readers and writers.

All outputs go through an atomic write (temp file + rename) so a crashed
command never leaves a half-written artifact behind.
"""
from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from .conditioning import CHANNELS, ChannelId
from .errors import ConfigurationError
from .session import TelemetrySample

RAW_HEADER = "t_ms,biceps_mV,triceps_mV,trapezius_mV,pectoralis_mV"
ENV_HEADER = "t_ms,biceps_env,triceps_env,trapezius_env,pectoralis_env"
REF_HEADER = "t_ms,s_imcj,s_ref,theta_ref,c_fi"


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_frames_csv(path, t_ms: np.ndarray, arrays: Dict[ChannelId, np.ndarray]) -> None:
    lines = [RAW_HEADER]
    cols = [np.asarray(arrays[ch], dtype=float) for ch in CHANNELS]
    for i, t in enumerate(np.asarray(t_ms, dtype=float)):
        lines.append(f"{t:.3f}," + ",".join(repr(float(c[i])) for c in cols))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_frames_csv(path) -> Tuple[np.ndarray, Dict[ChannelId, np.ndarray]]:
    with open(path) as f:
        header = f.readline().strip()
        if header != RAW_HEADER:
            raise ConfigurationError(
                f"unexpected CSV header {header!r}; expected {RAW_HEADER!r}"
            )
        data = np.loadtxt(f, delimiter=",", ndmin=2)
    if data.size == 0:
        return np.empty(0), {ch: np.empty(0) for ch in CHANNELS}
    t_ms = data[:, 0]
    if np.any(np.diff(t_ms) <= 0):
        raise ConfigurationError("frame timestamps must be strictly increasing")
    return t_ms, {ch: data[:, i + 1] for i, ch in enumerate(CHANNELS)}


def write_envelopes_csv(path, t_ms: np.ndarray, env: Dict[ChannelId, np.ndarray]) -> None:
    lines = [ENV_HEADER]
    cols = [np.asarray(env[ch], dtype=float) for ch in CHANNELS]
    for i, t in enumerate(np.asarray(t_ms, dtype=float)):
        lines.append(f"{t:.3f}," + ",".join(repr(float(c[i])) for c in cols))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_references_csv(path, rows: Sequence[Tuple[float, float, float, float, float]]) -> None:
    lines = [REF_HEADER]
    for t, s_imcj, s_ref, theta_ref, c_fi in rows:
        lines.append(f"{t:.3f},{s_imcj!r},{s_ref!r},{theta_ref!r},{c_fi!r}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_telemetry_jsonl(path, telemetry: Iterable[TelemetrySample]) -> None:
    lines = [json.dumps(ts.to_dict(), sort_keys=True) for ts in telemetry]
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def write_json(path, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_series_csv(path, header: str, columns: List[np.ndarray]) -> None:
    lines = [header]
    n = len(columns[0])
    for i in range(n):
        lines.append(",".join(repr(float(c[i])) for c in columns))
    atomic_write_text(path, "\n".join(lines) + "\n")

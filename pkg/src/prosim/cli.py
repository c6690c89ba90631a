"""Command-line surface: synth, condition, calibrate, estimate, fatigue-fit,
characterize, simulate, serve.

Exit codes: 0 ok, 2 input/config error, 3 fit failure, 4 insufficient signal.
"""
from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import click
import numpy as np

from . import io_files
from .conditioning import CHANNELS, ChannelId, condition_arrays
from .config import load_run_config
from .errors import ProsimError, SingularFitError
from .estimation import (
    BiomechParams,
    CalibrationProfile,
    TorqueSample,
    estimate_torque_elbow90,
    fit_imcj,
    references_from_envelope,
)
from .fatigue import FatigueCompensator, FatigueModel, detect_sustained, fit_fatigue, rms
from .plant import characterize_position, characterize_stiffness
from .session import BUILTIN_SCRIPTS, GraspScenario, simulate_grasp
from .synth import generate_arrays, load_profile_json

EXIT_INPUT = 2
EXIT_FIT = 3
EXIT_SIGNAL = 4


def _fail(code: int, msg: str):
    click.echo(f"error: {msg}", err=True)
    sys.exit(code)


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None, help="Run config file (JSON/TOML).")
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for synthetic randomness.")
@click.option("--out", "out_dir", type=click.Path(), default=None, help="Output directory override.")
@click.pass_context
def main(ctx, config_path, seed, out_dir):
    """sEMG tele-impedance interface and variable-stiffness hand simulator."""
    ctx.ensure_object(dict)
    try:
        cfg = load_run_config(config_path)
    except (ProsimError, json.JSONDecodeError) as e:
        _fail(EXIT_INPUT, str(e))
    if out_dir:
        cfg.out_dir = out_dir
    ctx.obj["config"] = cfg
    ctx.obj["seed"] = seed


@main.command()
@click.argument("profile_json", type=click.Path(exists=True))
@click.argument("out_csv", type=click.Path())
@click.pass_context
def synth(ctx, profile_json, out_csv):
    """Generate a raw sEMG CSV from an activation profile script."""
    try:
        profile, artifacts = load_profile_json(profile_json)
        if ctx.obj["seed"]:
            artifacts.seed = ctx.obj["seed"]
        cfg = ctx.obj["config"]
        t_ms, arrays = generate_arrays(profile, artifacts, cfg.pipeline.fs_hz, cfg.pipeline.mvc)
    except (ProsimError, json.JSONDecodeError, KeyError, ValueError) as e:
        _fail(EXIT_INPUT, f"bad profile: {e}")
    io_files.write_frames_csv(out_csv, t_ms, arrays)
    click.echo(f"wrote {len(t_ms)} frames to {out_csv}")


@main.command()
@click.argument("in_csv", type=click.Path(exists=True))
@click.argument("out_csv", type=click.Path())
@click.pass_context
def condition(ctx, in_csv, out_csv):
    """Condition a raw recording into normalized envelopes."""
    cfg = ctx.obj["config"]
    try:
        t_ms, arrays = io_files.read_frames_csv(in_csv)
        t_out, env = condition_arrays(t_ms, arrays, cfg.pipeline)
    except ProsimError as e:
        _fail(EXIT_INPUT, str(e))
    io_files.write_envelopes_csv(out_csv, t_out, env)
    click.echo(f"wrote {len(t_out)} envelope rows to {out_csv}")


def _protocol_windows(protocol: dict, t_out_ms: np.ndarray):
    """Index ranges of each trial's steady window within the conditioned stream
    (whose timestamps start after the startup discard)."""
    trial_s = float(protocol.get("trial_s", 6.0))
    rest_s = float(protocol.get("rest_s", 2.0))
    settle_s = float(protocol.get("settle_s", 2.0))
    loads = protocol["loads_kg"]
    for i, load in enumerate(loads):
        t0 = (i * (trial_s + rest_s) + settle_s) * 1000.0
        t1 = (i * (trial_s + rest_s) + trial_s) * 1000.0
        a = int(np.searchsorted(t_out_ms, t0))
        b = int(np.searchsorted(t_out_ms, t1))
        if b > t_out_ms.size or b <= a:
            break
        yield float(load), a, b


@main.command()
@click.argument("recording_csv", type=click.Path(exists=True))
@click.argument("protocol_json", type=click.Path(exists=True))
@click.argument("out_json", type=click.Path())
@click.pass_context
def calibrate(ctx, recording_csv, protocol_json, out_json):
    """Fit the co-contraction stiffness model from a dumbbell session.

    The protocol lists per-trial loads and the biomechanical constants; trial
    torques come from the elbow-at-90-degrees model and are normalized by the
    session maximum before the regression.
    """
    cfg = ctx.obj["config"]
    try:
        with open(protocol_json) as f:
            protocol = json.load(f)
        t_ms, arrays = io_files.read_frames_csv(recording_csv)
        biomech = protocol.get("biomech", {})
        t_out, env = condition_arrays(t_ms, arrays, cfg.pipeline)
    except (ProsimError, json.JSONDecodeError, KeyError) as e:
        _fail(EXIT_INPUT, str(e))

    taus, samples = [], []
    for load, a, b in _protocol_windows(protocol, t_out):
        p = BiomechParams(load_kg=load, **{k: float(v) for k, v in biomech.items()})
        taus.append((estimate_torque_elbow90(p), a, b))
    if not taus:
        _fail(EXIT_INPUT, "protocol defines no trials inside the recording")
    # torque normalized by the session maximum; one observation per trial using
    # the steady-window mean activation
    tau_max = max(abs(t) for t, _, _ in taus)
    for tau, a, b in taus:
        agon = float(np.clip(env[ChannelId.BICEPS][a:b], 0.0, 1.0).mean())
        anta = float(np.clip(env[ChannelId.TRICEPS][a:b], 0.0, 1.0).mean())
        samples.append(TorqueSample(tau / tau_max, agon, anta))
    try:
        profile = fit_imcj(samples)
    except SingularFitError as e:
        _fail(EXIT_FIT, f"singular fit: {e}")
    profile.mvc = dict(cfg.pipeline.mvc)
    profile.bias = dict(cfg.pipeline.bias)
    if "stiffness_floor" in protocol:
        profile.stiffness_floor = float(protocol["stiffness_floor"])
    if "stiffness_scale" in protocol:
        profile.stiffness_scale = float(protocol["stiffness_scale"])
    if "theta_range_rad" in protocol:
        profile.theta_range_rad = tuple(float(v) for v in protocol["theta_range_rad"])
    io_files.atomic_write_text(out_json, json.dumps(profile.to_json_dict(), indent=2) + "\n")
    click.echo(
        f"kappa={profile.kappa[0]:.4f} lambda={profile.lam[0]:.4f} "
        f"R2={profile.r_squared:.4f} RMSE={profile.rmse:.5f} -> {out_json}"
    )


@main.command()
@click.argument("recording_csv", type=click.Path(exists=True))
@click.argument("calibration_json", type=click.Path(exists=True))
@click.option("--out", "out_csv", type=click.Path(), default="references.csv", show_default=True)
@click.pass_context
def estimate(ctx, recording_csv, calibration_json, out_csv):
    """Convert a recording into per-tick stiffness/position references."""
    cfg = ctx.obj["config"]
    try:
        profile = CalibrationProfile.load(calibration_json)
        cfg.pipeline.mvc = dict(profile.mvc)
        cfg.pipeline.bias = dict(profile.bias)
        t_ms, arrays = io_files.read_frames_csv(recording_csv)
        t_out, env = condition_arrays(t_ms, arrays, cfg.pipeline)
    except (ProsimError, json.JSONDecodeError, KeyError) as e:
        _fail(EXIT_INPUT, str(e))

    fat = profile.fatigue
    model = (
        FatigueModel(fat.slope_per_s, fat.intercept, fat.r_squared) if fat else FatigueModel()
    )
    comp = FatigueCompensator(model, model, cfg.fatigue)
    rows = []
    dt = 1.0 / cfg.pipeline.fs_hz
    for i in range(t_out.size):
        sample = {ch: float(env[ch][i]) for ch in CHANNELS}
        comp.push_envelopes(sample[ChannelId.BICEPS], sample[ChannelId.TRICEPS])
        c_fi = comp.step(dt)
        refs = references_from_envelope(sample, profile, t_ms=float(t_out[i]), fatigue_factor=c_fi)
        rows.append((refs.t_ms, refs.s_imcj, refs.s_ref, refs.theta_ref, c_fi))
    io_files.write_references_csv(out_csv, rows)
    click.echo(f"wrote {len(rows)} reference rows to {out_csv}")


@main.command("fatigue-fit")
@click.argument("recording_csv", type=click.Path(exists=True))
@click.option("--out", "out_json", type=click.Path(), default="fatigue.json", show_default=True)
@click.pass_context
def fatigue_fit(ctx, recording_csv, out_json):
    """Fit the linear amplitude-decline model from sustained contractions."""
    cfg = ctx.obj["config"]
    try:
        t_ms, arrays = io_files.read_frames_csv(recording_csv)
        t_out, env = condition_arrays(t_ms, arrays, cfg.pipeline)
    except ProsimError as e:
        _fail(EXIT_INPUT, str(e))

    co = 0.5 * (env[ChannelId.BICEPS] + env[ChannelId.TRICEPS])
    active = detect_sustained(co, cfg.fatigue)
    if not bool(active.any()):
        _fail(EXIT_SIGNAL, "no sustained contraction found above threshold")

    # RMS feature on the band-passed, MVC-normalized signal over the detection
    # window length, evaluated against accumulated active time.
    from .conditioning import bandpass_array

    fs = cfg.pipeline.fs_hz
    k = cfg.pipeline.startup_discard
    win = cfg.fatigue.window_samples
    normed = {
        ch: bandpass_array(arrays[ch][k:], cfg.pipeline.filter, fs) / cfg.pipeline.mvc[ch]
        for ch in (ChannelId.BICEPS, ChannelId.TRICEPS)
    }
    series = []
    active_time = np.cumsum(active) / fs
    for ch, x in normed.items():
        pairs = []
        for start in range(0, active.size - win + 1, win):
            stop = start + win
            if not active[start:stop].all():
                continue
            pairs.append((float(active_time[stop - 1]), rms(x[start:stop])))
        if len(pairs) >= 2:
            series.append((ch, pairs))
    if not series:
        _fail(EXIT_SIGNAL, "sustained activity too short for an RMS series")

    models = {}
    for ch, pairs in series:
        try:
            raw_fit = fit_fatigue(pairs)
        except SingularFitError as e:
            _fail(EXIT_FIT, str(e))
        models[ch.value] = {
            "slope_per_s": raw_fit.slope / raw_fit.intercept,
            "intercept": 1.0,
            "r_squared": raw_fit.r_squared,
        }
    mean_slope = float(np.mean([m["slope_per_s"] for m in models.values()]))
    mean_r2 = float(np.mean([m["r_squared"] for m in models.values()]))
    out = {
        "fatigue": {"slope_per_s": mean_slope, "intercept": 1.0, "r_squared": mean_r2},
        "per_muscle": models,
    }
    io_files.write_json(out_json, out)
    click.echo(f"slope={mean_slope:.6f}/s R2={mean_r2:.3f} -> {out_json}")


@main.command()
@click.option("--mode", type=click.Choice(["stiffness", "position"]), required=True)
@click.option("--repetitions", type=int, default=10, show_default=True)
@click.option("--noise", type=float, default=0.01, show_default=True, help="Sensor noise sigma (fraction of full scale).")
@click.option("--plots", is_flag=True, help="Also emit SVG plots (requires matplotlib).")
@click.pass_context
def characterize(ctx, mode, repetitions, noise, plots):
    """Reproduce the bench characterization: force-deflection fits per level."""
    cfg = ctx.obj["config"]
    out_dir = Path(cfg.out_dir)
    rng = np.random.default_rng(ctx.obj["seed"])
    finger = cfg.finger
    profile = CalibrationProfile()

    if mode == "stiffness":
        targets = [0.091, 0.12, 0.16, 0.3, 1.7]
        levels = [finger.stiffness_for_tip_slope(kt) for kt in targets]
        runner = lambda: characterize_stiffness(
            cfg.vsa, finger, levels, noise_sigma=noise, rng=rng
        )
        label = "level_n_m_per_rad"
    else:
        positions = [0.0, math.radians(30), math.radians(60)]
        hold = finger.stiffness_for_tip_slope(0.16)
        runner = lambda: characterize_position(
            cfg.vsa, finger, positions, hold, noise_sigma=noise, rng=rng
        )
        label = "position_rad"

    trials = [runner() for _ in range(repetitions)]
    summary = []
    for i in range(len(trials[0])):
        slopes = [t[i].slope_n_per_mm for t in trials]
        r2s = [t[i].r_squared for t in trials]
        summary.append(
            {
                label: trials[0][i].commanded_level,
                "mean_slope_n_per_mm": float(np.mean(slopes)),
                "std_slope_n_per_mm": float(np.std(slopes)),
                "min_r_squared": float(np.min(r2s)),
                "trials": len(trials),
                "per_trial_fits": [
                    {
                        "slope_n_per_mm": float(s),
                        "r_squared": float(r),
                        "samples": int(t[i].force_n.size),
                    }
                    for s, r, t in zip(slopes, r2s, trials)
                ],
            }
        )
        # every trial's sweep, so the plotted shaded region is reproducible
        header = "force_n," + ",".join(
            f"deflection_mm_t{k:02d}" for k in range(len(trials))
        )
        io_files.write_series_csv(
            out_dir / f"characterize_{mode}_{i}.csv",
            header,
            [trials[0][i].force_n] + [t[i].deflection_mm for t in trials],
        )
    io_files.write_json(out_dir / f"characterize_{mode}.json", summary)
    if plots:
        _plot_characterization(out_dir, mode, trials)
    for row in summary:
        click.echo(
            f"{label}={row[label]:.4f} slope={row['mean_slope_n_per_mm']:.4f} N/mm "
            f"R2>={row['min_r_squared']:.4f} ({row['trials']} trials)"
        )


def _plot_characterization(out_dir: Path, mode: str, trials) -> None:
    try:
        import matplotlib

        matplotlib.use("svg")
        import matplotlib.pyplot as plt
    except ImportError:
        click.echo("matplotlib not installed; skipping plots", err=True)
        return
    fig, ax = plt.subplots(figsize=(6, 4))
    for i in range(len(trials[0])):
        for t in trials:
            ax.plot(t[i].deflection_mm, t[i].force_n, color="0.8", lw=0.5)
        mean_d = np.mean([t[i].deflection_mm for t in trials], axis=0)
        mean_f = np.mean([t[i].force_n for t in trials], axis=0)
        ax.plot(mean_d, mean_f, lw=1.5, label=f"level {trials[0][i].commanded_level:.3g}")
    ax.set_xlabel("deflection (mm)")
    ax.set_ylabel("force (N)")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out_dir / f"characterize_{mode}.svg")
    plt.close(fig)


@main.command()
@click.option("--scenario", type=click.Choice(["sponge", "egg", "rigid_block", "free"]), required=True)
@click.option("--script", "script_name", default="gentle", show_default=True,
              help="Built-in script name (gentle/crush/shallow/free) or a profile JSON path.")
@click.option("--live", is_flag=True, help="Defer input to the stream server instead of a script.")
@click.option("--port", type=int, default=8765, show_default=True, help="Port for --live mode.")
@click.pass_context
def simulate(ctx, scenario, script_name, live, port):
    """Run a scripted grasp trial and emit JSONL telemetry plus a summary."""
    cfg = ctx.obj["config"]
    if live:
        # input comes from connected clients; the scenario is preselected
        from .server import serve_forever

        click.echo(f"live session with scenario '{scenario}' on ws://127.0.0.1:{port}")
        serve_forever("127.0.0.1", port, cfg, seed=ctx.obj["seed"], scenario=scenario)
        return
    try:
        if script_name in BUILTIN_SCRIPTS:
            base = BUILTIN_SCRIPTS[script_name]()
            artifacts = base.artifacts
            profile_script = base.script
        else:
            profile_script, artifacts = load_profile_json(script_name)
        if ctx.obj["seed"]:
            artifacts.seed = ctx.obj["seed"]
        trial = simulate_grasp(GraspScenario(scenario, profile_script, artifacts), cfg)
    except (ProsimError, json.JSONDecodeError, FileNotFoundError) as e:
        _fail(EXIT_INPUT, str(e))
    out_dir = Path(cfg.out_dir)
    io_files.write_telemetry_jsonl(out_dir / "trial.jsonl", trial.telemetry)
    io_files.write_json(out_dir / "summary.json", trial.summary())
    click.echo(f"outcome={trial.outcome} peak_force={trial.peak_force_n:.3f} N -> {out_dir}")


@main.command()
@click.option("--port", type=int, default=8765, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.pass_context
def serve(ctx, port, host):
    """Serve live simulation sessions over the JSON websocket protocol."""
    from .server import serve_forever

    cfg = ctx.obj["config"]
    click.echo(f"listening on ws://{host}:{port}")
    serve_forever(host, port, cfg, seed=ctx.obj["seed"])


if __name__ == "__main__":
    main()

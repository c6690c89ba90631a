// Control-surface model: four activation levels, a co-contract macro that
// drives biceps and triceps together, and keyboard hold bindings. Pure logic;
// DOM wiring lives in app.ts.

import { MuscleChannel, clamp01, encodeActivation } from "./protocol.js";

export const COMMAND_RATE_HZ = 40; // >= 30 Hz while engaged
export const COMMAND_INTERVAL_MS = 1000 / COMMAND_RATE_HZ;

/** Keyboard holds: space co-contracts, up/down close/open the hand. */
export const KEY_BINDINGS: Record<string, { target: "cocontract" | MuscleChannel; level: number }> = {
  " ": { target: "cocontract", level: 0.8 },
  ArrowUp: { target: "trapezius", level: 0.7 },
  ArrowDown: { target: "pectoralis", level: 0.7 },
};

export class ControlSurface {
  levels: Record<MuscleChannel, number> = {
    biceps: 0,
    triceps: 0,
    trapezius: 0,
    pectoralis: 0,
  };
  /** Momentary keyboard overlays, OR-ed with the slider values. */
  private holds: Partial<Record<MuscleChannel, number>> = {};
  private lastChangeMs = -Infinity;

  setSlider(channel: MuscleChannel, value: number, nowMs: number): void {
    this.levels[channel] = clamp01(value);
    this.lastChangeMs = nowMs;
  }

  /** Macro slider: one knob pretensions the antagonist pair. */
  setCoContract(value: number, nowMs: number): void {
    const v = clamp01(value);
    this.levels.biceps = v;
    this.levels.triceps = v;
    this.lastChangeMs = nowMs;
  }

  keyDown(key: string, nowMs: number): boolean {
    const binding = KEY_BINDINGS[key];
    if (!binding) return false;
    if (binding.target === "cocontract") {
      this.holds.biceps = binding.level;
      this.holds.triceps = binding.level;
    } else {
      this.holds[binding.target] = binding.level;
    }
    this.lastChangeMs = nowMs;
    return true;
  }

  keyUp(key: string, nowMs: number): boolean {
    const binding = KEY_BINDINGS[key];
    if (!binding) return false;
    if (binding.target === "cocontract") {
      delete this.holds.biceps;
      delete this.holds.triceps;
    } else {
      delete this.holds[binding.target];
    }
    this.lastChangeMs = nowMs;
    return true;
  }

  effectiveLevels(): Record<MuscleChannel, number> {
    const out = { ...this.levels };
    for (const [ch, v] of Object.entries(this.holds)) {
      const channel = ch as MuscleChannel;
      out[channel] = clamp01(Math.max(out[channel], v ?? 0));
    }
    return out;
  }

  /** Commands keep flowing while any control is engaged or shortly after a
   * release so the server sees the return to rest. */
  engaged(nowMs: number): boolean {
    const active = Object.values(this.effectiveLevels()).some((v) => v > 0);
    return active || nowMs - this.lastChangeMs < 1000;
  }

  buildFrame(nowMs: number): string {
    return encodeActivation(nowMs, this.effectiveLevels());
  }
}

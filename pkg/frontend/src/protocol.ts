// Wire protocol spoken with the simulation server: JSON text frames over a
// websocket. Kept free of DOM types so the test runner can exercise it.

export type MuscleChannel = "biceps" | "triceps" | "trapezius" | "pectoralis";

export const MUSCLES: MuscleChannel[] = ["biceps", "triceps", "trapezius", "pectoralis"];

export type ScenarioName = "sponge" | "egg" | "rigid_block" | "free";

export const SCENARIOS: ScenarioName[] = ["sponge", "egg", "rigid_block", "free"];

export interface ActivationFrame {
  type: "activation";
  t: number;
  biceps: number;
  triceps: number;
  trapezius: number;
  pectoralis: number;
}

export interface StateFrame {
  type: "state";
  t: number;
  theta: number;
  theta_ref: number;
  s: number;
  s_ref: number;
  alpha: number;
  beta: number;
  fingertip_force: number;
  grasp: "none" | "holding" | "crushed" | "slipped";
  fatigue_factor: number;
}

export interface ErrorFrame {
  type: "error";
  msg: string;
}

export function clamp01(x: number): number {
  if (!Number.isFinite(x)) return 0;
  return Math.min(Math.max(x, 0), 1);
}

export function encodeActivation(
  t: number,
  levels: Record<MuscleChannel, number>,
): string {
  const frame: ActivationFrame = {
    type: "activation",
    t,
    biceps: clamp01(levels.biceps),
    triceps: clamp01(levels.triceps),
    trapezius: clamp01(levels.trapezius),
    pectoralis: clamp01(levels.pectoralis),
  };
  return JSON.stringify(frame);
}

export function encodeScenario(name: ScenarioName): string {
  return JSON.stringify({ type: "scenario", name });
}

export function encodeReset(): string {
  return JSON.stringify({ type: "reset" });
}

const GRASP_VALUES = new Set(["none", "holding", "crushed", "slipped"]);

/** Parse a server frame; returns null for anything malformed. */
export function parseServerFrame(raw: string): StateFrame | ErrorFrame | null {
  let msg: unknown;
  try {
    msg = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof msg !== "object" || msg === null) return null;
  const m = msg as Record<string, unknown>;
  if (m.type === "error" && typeof m.msg === "string") {
    return { type: "error", msg: m.msg };
  }
  if (m.type !== "state") return null;
  const numeric = ["t", "theta", "theta_ref", "s", "s_ref", "alpha", "beta",
    "fingertip_force", "fatigue_factor"] as const;
  for (const key of numeric) {
    if (typeof m[key] !== "number" || !Number.isFinite(m[key] as number)) return null;
  }
  if (typeof m.grasp !== "string" || !GRASP_VALUES.has(m.grasp)) return null;
  return m as unknown as StateFrame;
}

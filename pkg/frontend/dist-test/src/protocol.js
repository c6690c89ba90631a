// Wire protocol spoken with the simulation server: JSON text frames over a
// websocket. Kept free of DOM types so the test runner can exercise it.
export const MUSCLES = ["biceps", "triceps", "trapezius", "pectoralis"];
export const SCENARIOS = ["sponge", "egg", "rigid_block", "free"];
export function clamp01(x) {
    if (!Number.isFinite(x))
        return 0;
    return Math.min(Math.max(x, 0), 1);
}
export function encodeActivation(t, levels) {
    const frame = {
        type: "activation",
        t,
        biceps: clamp01(levels.biceps),
        triceps: clamp01(levels.triceps),
        trapezius: clamp01(levels.trapezius),
        pectoralis: clamp01(levels.pectoralis),
    };
    return JSON.stringify(frame);
}
export function encodeScenario(name) {
    return JSON.stringify({ type: "scenario", name });
}
export function encodeReset() {
    return JSON.stringify({ type: "reset" });
}
const GRASP_VALUES = new Set(["none", "holding", "crushed", "slipped"]);
/** Parse a server frame; returns null for anything malformed. */
export function parseServerFrame(raw) {
    let msg;
    try {
        msg = JSON.parse(raw);
    }
    catch {
        return null;
    }
    if (typeof msg !== "object" || msg === null)
        return null;
    const m = msg;
    if (m.type === "error" && typeof m.msg === "string") {
        return { type: "error", msg: m.msg };
    }
    if (m.type !== "state")
        return null;
    const numeric = ["t", "theta", "theta_ref", "s", "s_ref", "alpha", "beta",
        "fingertip_force", "fatigue_factor"];
    for (const key of numeric) {
        if (typeof m[key] !== "number" || !Number.isFinite(m[key]))
            return null;
    }
    if (typeof m.grasp !== "string" || !GRASP_VALUES.has(m.grasp))
        return null;
    return m;
}

// Drives the real simulation server over the wire protocol, using the same
// control-surface and telemetry-store logic the panel runs. Covers the
// operator-loop checks: co-contraction moves the stiffness gauge with the
// hand open, trapezius closes the hand without disturbing the stiffness
// gauge, and telemetry time is non-decreasing at >= 30 Hz.
import assert from "node:assert/strict";
import { spawn } from "node:child_process";
import { once } from "node:events";
import { test } from "node:test";
import WebSocket from "ws";
import { ControlSurface } from "../src/controls.js";
import { parseServerFrame } from "../src/protocol.js";
import { TelemetryStore } from "../src/state.js";
const PORT = 18000 + Math.floor(Math.random() * 20000);
function startServer() {
    return spawn("python3", ["-m", "prosim.cli", "serve", "--port", String(PORT)], {
        stdio: ["ignore", "pipe", "pipe"],
    });
}
async function connectWithRetry(url, attempts = 40) {
    for (let i = 0; i < attempts; i++) {
        try {
            const ws = new WebSocket(url);
            await once(ws, "open");
            return ws;
        }
        catch {
            await new Promise((r) => setTimeout(r, 250));
        }
    }
    throw new Error(`server did not come up on ${url}`);
}
/** Stream the surface's commands for a wall-clock window, collecting state. */
async function drivePhase(ws, surface, store, ms) {
    const frames = [];
    const listener = (data) => {
        const frame = parseServerFrame(String(data));
        if (frame && frame.type === "state" && store.push(frame)) {
            frames.push(frame);
        }
    };
    ws.on("message", listener);
    const tick = setInterval(() => {
        ws.send(surface.buildFrame(Date.now()));
    }, 25);
    await new Promise((r) => setTimeout(r, ms));
    clearInterval(tick);
    ws.off("message", listener);
    return { store, frames };
}
function meanSref(frames, tail) {
    const last = frames.slice(-tail);
    return last.reduce((acc, f) => acc + f.s_ref, 0) / last.length;
}
test("operator loop against the live server", { timeout: 120000 }, async () => {
    const server = startServer();
    try {
        const ws = await connectWithRetry(`ws://127.0.0.1:${PORT}`);
        const store = new TelemetryStore();
        const surface = new ControlSurface();
        // settle at rest, then drive the co-contract macro
        const rest = await drivePhase(ws, surface, store, 1500);
        const baseline = meanSref(rest.frames, 20);
        surface.setCoContract(0.8, Date.now());
        const stiff = await drivePhase(ws, surface, store, 2500);
        const raised = meanSref(stiff.frames, 20);
        const lastStiff = stiff.frames[stiff.frames.length - 1];
        assert.ok(raised > 2 * baseline, `stiffness gauge should rise under co-contraction (${baseline} -> ${raised})`);
        assert.ok(Math.abs(lastStiff.theta) < 0.05, `hand must stay open under co-contraction, theta=${lastStiff.theta}`);
        // telemetry ordering and rate over everything seen so far
        assert.equal(store.droppedOutOfOrder, 0);
        const all = [...rest.frames, ...stiff.frames];
        const span = all[all.length - 1].t - all[0].t;
        assert.ok(all.length / span >= 30, `telemetry rate ${all.length / span} Hz < 30 Hz`);
        ws.close();
        // fresh session: trapezius closes the hand without moving the gauge
        const ws2 = await connectWithRetry(`ws://127.0.0.1:${PORT}`);
        const store2 = new TelemetryStore();
        const surface2 = new ControlSurface();
        const rest2 = await drivePhase(ws2, surface2, store2, 1500);
        const baseline2 = meanSref(rest2.frames, 20);
        surface2.setSlider("trapezius", 1.0, Date.now());
        const closed = await drivePhase(ws2, surface2, store2, 3500);
        const lastClosed = closed.frames[closed.frames.length - 1];
        assert.ok(lastClosed.theta > 1.45, `trapezius should close the hand, theta=${lastClosed.theta}`);
        for (const f of closed.frames) {
            assert.ok(Math.abs(f.s_ref - baseline2) / baseline2 < 0.05, `stiffness gauge disturbed by ${Math.abs(f.s_ref - baseline2) / baseline2}`);
        }
        assert.equal(store2.droppedOutOfOrder, 0);
        ws2.close();
    }
    finally {
        server.kill("SIGTERM");
    }
});

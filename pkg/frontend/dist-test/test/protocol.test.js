import assert from "node:assert/strict";
import { test } from "node:test";
import { clamp01, encodeActivation, encodeReset, encodeScenario, parseServerFrame, } from "../src/protocol.js";
test("clamp01 bounds and rejects non-finite", () => {
    assert.equal(clamp01(0.5), 0.5);
    assert.equal(clamp01(-0.2), 0);
    assert.equal(clamp01(1.7), 1);
    assert.equal(clamp01(NaN), 0);
    assert.equal(clamp01(Infinity), 0);
});
test("activation frames are clamped on encode", () => {
    const raw = encodeActivation(123, {
        biceps: 1.5,
        triceps: -0.1,
        trapezius: 0.25,
        pectoralis: 0,
    });
    const frame = JSON.parse(raw);
    assert.equal(frame.type, "activation");
    assert.equal(frame.t, 123);
    assert.equal(frame.biceps, 1);
    assert.equal(frame.triceps, 0);
    assert.equal(frame.trapezius, 0.25);
});
test("scenario and reset frames", () => {
    assert.deepEqual(JSON.parse(encodeScenario("egg")), { type: "scenario", name: "egg" });
    assert.deepEqual(JSON.parse(encodeReset()), { type: "reset" });
});
test("parse accepts valid state frames", () => {
    const raw = JSON.stringify({
        type: "state", t: 1.25, theta: 0.3, theta_ref: 0.31, s: 1.0, s_ref: 1.1,
        alpha: 2.0, beta: 2.5, fingertip_force: 0.0, grasp: "holding", fatigue_factor: 1.0,
    });
    const frame = parseServerFrame(raw);
    assert.ok(frame && frame.type === "state");
    assert.equal(frame.grasp, "holding");
});
test("parse accepts error frames", () => {
    const frame = parseServerFrame(JSON.stringify({ type: "error", msg: "nope" }));
    assert.ok(frame && frame.type === "error");
});
test("parse drops malformed input", () => {
    assert.equal(parseServerFrame("{broken"), null);
    assert.equal(parseServerFrame(JSON.stringify({ type: "state", t: "x" })), null);
    assert.equal(parseServerFrame(JSON.stringify({ type: "state", t: 1 })), null);
    assert.equal(parseServerFrame(JSON.stringify({ t: 1 })), null);
    assert.equal(parseServerFrame(JSON.stringify({
        type: "state", t: 1, theta: 0, theta_ref: 0, s: 1, s_ref: 1,
        alpha: 0, beta: 0, fingertip_force: 0, grasp: "exploded", fatigue_factor: 1,
    })), null);
});

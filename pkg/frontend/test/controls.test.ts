import assert from "node:assert/strict";
import { test } from "node:test";

import { COMMAND_RATE_HZ, ControlSurface } from "../src/controls.js";

test("command rate meets the 30 Hz floor", () => {
  assert.ok(COMMAND_RATE_HZ >= 30);
});

test("co-contract macro drives biceps and triceps together", () => {
  const surface = new ControlSurface();
  surface.setCoContract(0.8, 0);
  const frame = JSON.parse(surface.buildFrame(10));
  assert.equal(frame.biceps, 0.8);
  assert.equal(frame.triceps, 0.8);
  assert.equal(frame.trapezius, 0);
});

test("slider values are clamped by construction", () => {
  const surface = new ControlSurface();
  surface.setSlider("trapezius", 3.0, 0);
  surface.setSlider("pectoralis", -1.0, 0);
  const levels = surface.effectiveLevels();
  assert.equal(levels.trapezius, 1);
  assert.equal(levels.pectoralis, 0);
});

test("all sliders zero produces a rest frame", () => {
  const surface = new ControlSurface();
  const frame = JSON.parse(surface.buildFrame(5));
  for (const ch of ["biceps", "triceps", "trapezius", "pectoralis"]) {
    assert.equal(frame[ch], 0);
  }
});

test("keyboard hold overlays and releases", () => {
  const surface = new ControlSurface();
  assert.ok(surface.keyDown(" ", 0));
  let levels = surface.effectiveLevels();
  assert.equal(levels.biceps, 0.8);
  assert.equal(levels.triceps, 0.8);
  assert.ok(surface.keyUp(" ", 100));
  levels = surface.effectiveLevels();
  assert.equal(levels.biceps, 0);
  assert.ok(!surface.keyDown("q", 0));
});

test("hold does not reduce a higher slider value", () => {
  const surface = new ControlSurface();
  surface.setSlider("trapezius", 0.9, 0);
  surface.keyDown("ArrowUp", 0); // overlay level 0.7
  assert.equal(surface.effectiveLevels().trapezius, 0.9);
});

test("engagement covers active controls plus a release tail", () => {
  const surface = new ControlSurface();
  assert.ok(!surface.engaged(0));
  surface.setSlider("biceps", 0.3, 1000);
  assert.ok(surface.engaged(1001));
  surface.setSlider("biceps", 0.0, 2000);
  assert.ok(surface.engaged(2500)); // within the release tail
  assert.ok(!surface.engaged(4000));
});

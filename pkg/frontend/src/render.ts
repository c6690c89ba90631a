// Canvas renderers: 2D hand schematic, reference-vs-actual gauges, and the
// scrolling strip charts. Everything redraws from the latest snapshot; when
// frames outpace the display we simply draw the newest one.

import { StateFrame } from "./protocol.js";
import { TelemetryStore } from "./state.js";

const THETA_MAX = Math.PI / 2;

export function drawHand(ctx: CanvasRenderingContext2D, frame: StateFrame | null): void {
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  const theta = frame ? Math.min(Math.max(frame.theta, 0), THETA_MAX) : 0;

  // palm block with a passive support post, fingers as a two-segment bank
  const baseX = width * 0.3;
  const baseY = height * 0.62;
  ctx.fillStyle = "#2b3a4a";
  ctx.fillRect(baseX - 58, baseY - 36, 58, 86);
  ctx.fillStyle = "#24313f";
  ctx.fillRect(baseX - 14, baseY + 42, 130, 12);

  const seg = width * 0.22;
  const knuckle = { x: baseX, y: baseY };
  const a1 = theta; // proximal flexion
  const a2 = theta * 0.8; // distal wrap follows
  const mid = { x: knuckle.x + seg * Math.cos(a1), y: knuckle.y + seg * Math.sin(a1) };
  const tip = {
    x: mid.x + seg * 0.75 * Math.cos(a1 + a2),
    y: mid.y + seg * 0.75 * Math.sin(a1 + a2),
  };
  ctx.lineCap = "round";
  ctx.strokeStyle = "#7fd1b9";
  ctx.lineWidth = 16;
  ctx.beginPath();
  ctx.moveTo(knuckle.x, knuckle.y);
  ctx.lineTo(mid.x, mid.y);
  ctx.lineTo(tip.x, tip.y);
  ctx.stroke();

  if (frame && frame.fingertip_force > 0.02) {
    ctx.fillStyle = "#e8b14e";
    ctx.beginPath();
    ctx.arc(tip.x, tip.y, 5 + Math.min(frame.fingertip_force, 8) * 1.6, 0, 2 * Math.PI);
    ctx.fill();
  }
}

function gauge(
  ctx: CanvasRenderingContext2D,
  cx: number,
  cy: number,
  radius: number,
  fracActual: number,
  fracRef: number,
  label: string,
  text: string,
): void {
  const start = Math.PI * 0.75;
  const span = Math.PI * 1.5;
  ctx.lineWidth = 9;
  ctx.strokeStyle = "#31404f";
  ctx.beginPath();
  ctx.arc(cx, cy, radius, start, start + span);
  ctx.stroke();
  ctx.strokeStyle = "#7fd1b9";
  ctx.beginPath();
  ctx.arc(cx, cy, radius, start, start + span * Math.min(Math.max(fracActual, 0), 1));
  ctx.stroke();
  // reference needle
  const ang = start + span * Math.min(Math.max(fracRef, 0), 1);
  ctx.strokeStyle = "#e8b14e";
  ctx.lineWidth = 3;
  ctx.beginPath();
  ctx.moveTo(cx + (radius - 14) * Math.cos(ang), cy + (radius - 14) * Math.sin(ang));
  ctx.lineTo(cx + (radius + 9) * Math.cos(ang), cy + (radius + 9) * Math.sin(ang));
  ctx.stroke();
  ctx.fillStyle = "#c7d4df";
  ctx.font = "12px sans-serif";
  ctx.textAlign = "center";
  ctx.fillText(label, cx, cy + radius + 22);
  ctx.fillText(text, cx, cy + 5);
}

export function drawGauges(
  ctx: CanvasRenderingContext2D,
  frame: StateFrame | null,
  sMax: number,
): void {
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  const s = frame ? frame.s : 0;
  const sRef = frame ? frame.s_ref : 0;
  const th = frame ? frame.theta : 0;
  const thRef = frame ? frame.theta_ref : 0;
  gauge(ctx, width * 0.27, height * 0.48, 46, s / sMax, sRef / sMax,
    "stiffness (N*m/rad)", s.toFixed(2));
  gauge(ctx, width * 0.74, height * 0.48, 46, th / THETA_MAX, thRef / THETA_MAX,
    "flexion (rad)", th.toFixed(2));
}

function polyline(
  ctx: CanvasRenderingContext2D,
  times: readonly number[],
  values: readonly number[],
  t0: number,
  t1: number,
  vMax: number,
  y0: number,
  h: number,
  color: string,
  dashed: boolean,
): void {
  if (times.length < 2) return;
  const { width } = ctx.canvas;
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.5;
  ctx.setLineDash(dashed ? [5, 4] : []);
  ctx.beginPath();
  for (let i = 0; i < times.length; i++) {
    const x = ((times[i] - t0) / (t1 - t0)) * width;
    const y = y0 + h - (Math.min(values[i], vMax) / vMax) * h;
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  }
  ctx.stroke();
  ctx.setLineDash([]);
}

export function drawCharts(
  ctx: CanvasRenderingContext2D,
  store: TelemetryStore,
  sMax: number,
): void {
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  const times = store.charts.s.times();
  if (times.length < 2) return;
  const t1 = times[times.length - 1];
  const t0 = Math.max(times[0], t1 - store.charts.s.windowS);
  const half = height / 2;
  ctx.fillStyle = "#8aa0b3";
  ctx.font = "11px sans-serif";
  ctx.textAlign = "left";
  ctx.fillText("stiffness: actual vs ref", 6, 13);
  ctx.fillText("flexion: actual vs ref", 6, half + 13);
  ctx.strokeStyle = "#1d2833";
  ctx.beginPath();
  ctx.moveTo(0, half);
  ctx.lineTo(width, half);
  ctx.stroke();
  polyline(ctx, store.charts.s.times(), store.charts.s.values(), t0, t1, sMax, 0, half - 6, "#7fd1b9", false);
  polyline(ctx, store.charts.s_ref.times(), store.charts.s_ref.values(), t0, t1, sMax, 0, half - 6, "#e8b14e", true);
  polyline(ctx, store.charts.theta.times(), store.charts.theta.values(), t0, t1, THETA_MAX, half, half - 6, "#7fd1b9", false);
  polyline(ctx, store.charts.theta_ref.times(), store.charts.theta_ref.values(), t0, t1, THETA_MAX, half, half - 6, "#e8b14e", true);
}

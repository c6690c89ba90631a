// Panel wiring: DOM controls -> command loop -> websocket -> telemetry store
// -> render loop. Single UI thread; socket events only mutate the store.

import { PanelClient, ConnectionStatus } from "./client.js";
import { COMMAND_INTERVAL_MS, ControlSurface } from "./controls.js";
import { MUSCLES, MuscleChannel, SCENARIOS, ScenarioName, encodeReset, encodeScenario } from "./protocol.js";
import { drawCharts, drawGauges, drawHand } from "./render.js";
import { TelemetryStore } from "./state.js";

// full-scale of the stiffness gauge; matches the default device range
const S_GAUGE_MAX = 4.5;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function serverUrl(): string {
  const params = new URLSearchParams(location.search);
  return params.get("server") ?? "ws://127.0.0.1:8765";
}

function main(): void {
  const store = new TelemetryStore(30);
  const surface = new ControlSurface();
  const banner = el<HTMLDivElement>("banner");
  const badge = el<HTMLSpanElement>("grasp-badge");
  const fatigue = el<HTMLSpanElement>("fatigue");
  const stale = el<HTMLSpanElement>("stale");

  let status: ConnectionStatus = "connecting";
  const client = new PanelClient(serverUrl(), {
    onState: (frame) => {
      store.push(frame);
      stale.hidden = true;
    },
    onServerError: (frame) => {
      banner.textContent = `server: ${frame.msg}`;
      banner.className = "banner warn";
    },
    onStatus: (s) => {
      status = s;
      banner.textContent =
        s === "connected" ? `connected to ${client.url}` :
        s === "retrying" ? "connection lost, retrying..." :
        s === "connecting" ? "connecting..." : "closed";
      banner.className = s === "connected" ? "banner ok" : "banner warn";
    },
  });
  client.connect();

  // controls
  const sliders: Partial<Record<MuscleChannel | "cocontract", HTMLInputElement>> = {};
  for (const ch of MUSCLES) {
    const input = el<HTMLInputElement>(`slider-${ch}`);
    sliders[ch] = input;
    input.addEventListener("input", () => {
      surface.setSlider(ch, input.valueAsNumber, performance.now());
    });
  }
  const macro = el<HTMLInputElement>("slider-cocontract");
  macro.addEventListener("input", () => {
    surface.setCoContract(macro.valueAsNumber, performance.now());
    sliders.biceps!.valueAsNumber = macro.valueAsNumber;
    sliders.triceps!.valueAsNumber = macro.valueAsNumber;
  });

  const scenario = el<HTMLSelectElement>("scenario");
  for (const name of SCENARIOS) {
    const opt = document.createElement("option");
    opt.value = name;
    opt.textContent = name;
    scenario.appendChild(opt);
  }
  scenario.value = "free";
  scenario.addEventListener("change", () => {
    client.send(encodeScenario(scenario.value as ScenarioName));
    store.resetHistory();
  });

  el<HTMLButtonElement>("reset").addEventListener("click", () => {
    client.send(encodeReset());
    store.clearLatch();
  });

  window.addEventListener("keydown", (ev) => {
    if (ev.repeat) return;
    if (surface.keyDown(ev.key, performance.now())) ev.preventDefault();
  });
  window.addEventListener("keyup", (ev) => {
    if (surface.keyUp(ev.key, performance.now())) ev.preventDefault();
  });

  // command loop: >= 30 Hz while engaged; frames are dropped (and the view
  // flagged stale) while disconnected
  setInterval(() => {
    const now = performance.now();
    if (!surface.engaged(now) && status === "connected") return;
    const sent = client.send(surface.buildFrame(now));
    if (!sent && surface.engaged(now)) stale.hidden = false;
  }, COMMAND_INTERVAL_MS);

  // render loop
  const handCtx = el<HTMLCanvasElement>("hand").getContext("2d")!;
  const gaugeCtx = el<HTMLCanvasElement>("gauges").getContext("2d")!;
  const chartCtx = el<HTMLCanvasElement>("charts").getContext("2d")!;
  function render(): void {
    drawHand(handCtx, store.latest);
    drawGauges(gaugeCtx, store.latest, S_GAUGE_MAX);
    drawCharts(chartCtx, store, S_GAUGE_MAX);
    const b = store.graspBadge();
    badge.textContent = b;
    badge.className = `badge ${b}`;
    fatigue.textContent = store.latest
      ? `fatigue x${store.latest.fatigue_factor.toFixed(2)}`
      : "fatigue x1.00";
    requestAnimationFrame(render);
  }
  requestAnimationFrame(render);
}

main();

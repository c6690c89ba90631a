// Telemetry store: latest-frame view model plus chart history. Guards the
// non-decreasing-time invariant and latches crush/slip events until reset.

import { StateFrame } from "./protocol.js";
import { TimeSeriesRing } from "./ringbuffer.js";

export interface ChartSet {
  s: TimeSeriesRing;
  s_ref: TimeSeriesRing;
  theta: TimeSeriesRing;
  theta_ref: TimeSeriesRing;
}

export class TelemetryStore {
  latest: StateFrame | null = null;
  /** Crush/slip stays displayed until the operator resets, even if later
   * frames report otherwise. */
  latchedGrasp: "crushed" | "slipped" | null = null;
  droppedOutOfOrder = 0;
  framesSeen = 0;
  charts: ChartSet;

  constructor(windowS = 30) {
    this.charts = {
      s: new TimeSeriesRing(windowS),
      s_ref: new TimeSeriesRing(windowS),
      theta: new TimeSeriesRing(windowS),
      theta_ref: new TimeSeriesRing(windowS),
    };
  }

  push(frame: StateFrame): boolean {
    if (this.latest !== null && frame.t < this.latest.t) {
      this.droppedOutOfOrder++;
      return false;
    }
    this.framesSeen++;
    this.latest = frame;
    if (frame.grasp === "crushed" || frame.grasp === "slipped") {
      this.latchedGrasp = frame.grasp;
    }
    this.charts.s.push(frame.t, frame.s);
    this.charts.s_ref.push(frame.t, frame.s_ref);
    this.charts.theta.push(frame.t, frame.theta);
    this.charts.theta_ref.push(frame.t, frame.theta_ref);
    return true;
  }

  /** Badge content: a latched event wins over the instantaneous state. */
  graspBadge(): string {
    if (this.latchedGrasp) return this.latchedGrasp;
    return this.latest ? this.latest.grasp : "none";
  }

  clearLatch(): void {
    this.latchedGrasp = null;
  }

  resetHistory(): void {
    this.clearLatch();
    this.charts.s.clear();
    this.charts.s_ref.clear();
    this.charts.theta.clear();
    this.charts.theta_ref.clear();
  }
}

// Websocket client with automatic retry. Reconnecting resumes telemetry in
// the same page; each connection is a fresh simulation session server-side.

import { ErrorFrame, StateFrame, parseServerFrame } from "./protocol.js";

export type ConnectionStatus = "connecting" | "connected" | "retrying" | "closed";

export interface ClientEvents {
  onState: (frame: StateFrame) => void;
  onServerError: (frame: ErrorFrame) => void;
  onStatus: (status: ConnectionStatus) => void;
}

const RETRY_DELAY_MS = 1500;

export class PanelClient {
  private ws: WebSocket | null = null;
  private closed = false;
  private retryTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(readonly url: string, readonly events: ClientEvents) {}

  connect(): void {
    this.closed = false;
    this.open();
  }

  private open(): void {
    this.events.onStatus("connecting");
    this.ws = new WebSocket(this.url);
    this.ws.onopen = () => this.events.onStatus("connected");
    this.ws.onmessage = (ev: MessageEvent) => {
      const frame = parseServerFrame(String(ev.data));
      if (frame === null) {
        console.warn("dropped malformed frame", ev.data);
        return;
      }
      if (frame.type === "error") {
        this.events.onServerError(frame);
      } else {
        this.events.onState(frame);
      }
    };
    this.ws.onclose = () => this.scheduleRetry();
    this.ws.onerror = () => {
      /* close follows; retry handled there */
    };
  }

  private scheduleRetry(): void {
    this.ws = null;
    if (this.closed) {
      this.events.onStatus("closed");
      return;
    }
    this.events.onStatus("retrying");
    this.retryTimer = setTimeout(() => this.open(), RETRY_DELAY_MS);
  }

  get connected(): boolean {
    return this.ws !== null && this.ws.readyState === WebSocket.OPEN;
  }

  /** Send a frame; returns false (frame dropped) when disconnected. */
  send(raw: string): boolean {
    if (!this.connected || this.ws === null) return false;
    this.ws.send(raw);
    return true;
  }

  close(): void {
    this.closed = true;
    if (this.retryTimer !== null) clearTimeout(this.retryTimer);
    this.ws?.close();
  }
}

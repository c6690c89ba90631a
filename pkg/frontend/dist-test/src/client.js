// Websocket client with automatic retry. Reconnecting resumes telemetry in
// the same page; each connection is a fresh simulation session server-side.
import { parseServerFrame } from "./protocol.js";
const RETRY_DELAY_MS = 1500;
export class PanelClient {
    constructor(url, events) {
        this.url = url;
        this.events = events;
        this.ws = null;
        this.closed = false;
        this.retryTimer = null;
    }
    connect() {
        this.closed = false;
        this.open();
    }
    open() {
        this.events.onStatus("connecting");
        this.ws = new WebSocket(this.url);
        this.ws.onopen = () => this.events.onStatus("connected");
        this.ws.onmessage = (ev) => {
            const frame = parseServerFrame(String(ev.data));
            if (frame === null) {
                console.warn("dropped malformed frame", ev.data);
                return;
            }
            if (frame.type === "error") {
                this.events.onServerError(frame);
            }
            else {
                this.events.onState(frame);
            }
        };
        this.ws.onclose = () => this.scheduleRetry();
        this.ws.onerror = () => {
            /* close follows; retry handled there */
        };
    }
    scheduleRetry() {
        this.ws = null;
        if (this.closed) {
            this.events.onStatus("closed");
            return;
        }
        this.events.onStatus("retrying");
        this.retryTimer = setTimeout(() => this.open(), RETRY_DELAY_MS);
    }
    get connected() {
        return this.ws !== null && this.ws.readyState === WebSocket.OPEN;
    }
    /** Send a frame; returns false (frame dropped) when disconnected. */
    send(raw) {
        if (!this.connected || this.ws === null)
            return false;
        this.ws.send(raw);
        return true;
    }
    close() {
        this.closed = true;
        if (this.retryTimer !== null)
            clearTimeout(this.retryTimer);
        this.ws?.close();
    }
}

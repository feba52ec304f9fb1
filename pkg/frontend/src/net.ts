/**
 * Session connection with exponential-backoff reconnect and a heartbeat
 * watchdog that reports a stalled stream within two seconds.
 */

import { parseServerMessage, ServerMessage } from "./protocol.js";

export type SessionStatus = "connecting" | "open" | "stalled" | "closed";

export interface SessionCallbacks {
  onMessage: (msg: ServerMessage) => void;
  onStatus: (status: SessionStatus) => void;
}

const HEARTBEAT_TIMEOUT_MS = 2000;
const BACKOFF_START_MS = 500;
const BACKOFF_MAX_MS = 8000;

export class Session {
  private ws: WebSocket | null = null;
  private backoff = BACKOFF_START_MS;
  private lastMessage = 0;
  private watchdog: ReturnType<typeof setInterval> | null = null;
  private closed = false;

  constructor(private url: string, private cb: SessionCallbacks) {}

  connect(): void {
    this.closed = false;
    this.cb.onStatus("connecting");
    this.open();
    this.watchdog = setInterval(() => {
      if (this.ws && this.lastMessage && Date.now() - this.lastMessage > HEARTBEAT_TIMEOUT_MS) {
        this.cb.onStatus("stalled");
      }
    }, 500);
  }

  private open(): void {
    let ws: WebSocket;
    try {
      ws = new WebSocket(this.url);
    } catch {
      this.scheduleReconnect();
      return;
    }
    this.ws = ws;
    ws.onopen = () => {
      this.backoff = BACKOFF_START_MS;
      this.cb.onStatus("open");
    };
    ws.onmessage = (ev) => {
      this.lastMessage = Date.now();
      const msg = parseServerMessage(String(ev.data));
      if (msg === null) {
        console.warn("dropping malformed server message");
        return;
      }
      this.cb.onMessage(msg);
    };
    ws.onclose = () => {
      this.ws = null;
      if (!this.closed) {
        this.cb.onStatus("closed");
        this.scheduleReconnect();
      }
    };
    ws.onerror = () => ws.close();
  }

  private scheduleReconnect(): void {
    if (this.closed) return;
    setTimeout(() => this.open(), this.backoff);
    this.backoff = Math.min(this.backoff * 2, BACKOFF_MAX_MS);
  }

  send(obj: unknown): void {
    if (this.ws && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(JSON.stringify(obj));
    }
  }

  close(): void {
    this.closed = true;
    if (this.watchdog) clearInterval(this.watchdog);
    this.ws?.close();
  }
}

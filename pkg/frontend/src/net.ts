/**
 * Connection management: hello on open, auto-retry with a visible status,
 * one strictly increasing seq counter that survives reconnects.
 *
 * The socket is injected so tests (and the Node integration harness) can
 * supply a TCP adapter while the browser uses a real WebSocket.
 */

import { OutboundFrame, SessionMsg, encodeFrame, helloMsg, parseFrame } from "./protocol.js";

export interface SocketLike {
  send(text: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((text: string) => void) | null;
  onclose: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export type LinkStatus = "connecting" | "connected" | "disconnected" | "closed";

export interface LinkHandlers {
  onStatus?: (status: LinkStatus) => void;
  onMessage?: (msg: SessionMsg) => void;
}

export interface LinkOptions {
  sender?: string;
  retryMs?: number;
  now?: () => number;
  setTimer?: (fn: () => void, ms: number) => unknown;
}

export class RiderLink {
  readonly sender: string;
  status: LinkStatus = "disconnected";
  private seq = 0;
  private url = "";
  private socket: SocketLike | null = null;
  private closedByUser = false;
  private readonly retryMs: number;
  private readonly now: () => number;
  private readonly setTimer: (fn: () => void, ms: number) => unknown;

  constructor(private factory: SocketFactory, private handlers: LinkHandlers = {},
              opts: LinkOptions = {}) {
    this.sender = opts.sender ?? "console";
    this.retryMs = opts.retryMs ?? 1000;
    this.now = opts.now ?? (() => Date.now());
    this.setTimer = opts.setTimer ?? ((fn, ms) => setTimeout(fn, ms));
  }

  get lastSeq(): number {
    return this.seq;
  }

  private nextSeq = (): number => {
    this.seq += 1;
    return this.seq;
  };

  private setStatus(status: LinkStatus): void {
    this.status = status;
    this.handlers.onStatus?.(status);
  }

  connect(url: string): void {
    this.url = url;
    this.closedByUser = false;
    this.open();
  }

  private open(): void {
    this.setStatus("connecting");
    let socket: SocketLike;
    try {
      socket = this.factory(this.url);
    } catch {
      this.scheduleRetry();
      return;
    }
    this.socket = socket;
    socket.onopen = () => {
      this.setStatus("connected");
      this.sendRaw(helloMsg(this.sender, this.nextSeq(), this.now()));
    };
    socket.onmessage = (text) => {
      let msg: SessionMsg;
      try {
        msg = parseFrame(text);
      } catch {
        return; // tolerate garbage on the stream; rendering must not crash
      }
      this.handlers.onMessage?.(msg);
    };
    socket.onclose = () => {
      this.socket = null;
      if (this.closedByUser) {
        this.setStatus("closed");
      } else {
        this.scheduleRetry();
      }
    };
  }

  private scheduleRetry(): void {
    this.setStatus("disconnected");
    this.setTimer(() => {
      if (!this.closedByUser) this.open();
    }, this.retryMs);
  }

  private sendRaw(frame: OutboundFrame): void {
    this.socket?.send(encodeFrame(frame));
  }

  /** Send a frame builder's output, filling in sender/seq/t_ms. */
  send(build: (sender: string, seq: number, tMs: number) => OutboundFrame): boolean {
    if (this.status !== "connected" || this.socket === null) return false;
    this.sendRaw(build(this.sender, this.nextSeq(), this.now()));
    return true;
  }

  /** Send prebuilt frames that already carry sender/seq (e.g. rig output). */
  sendFrames(frames: OutboundFrame[]): boolean {
    if (this.status !== "connected" || this.socket === null) return false;
    for (const frame of frames) this.sendRaw(frame);
    return true;
  }

  seqSource(): () => number {
    return this.nextSeq;
  }

  close(): void {
    this.closedByUser = true;
    this.socket?.close();
    if (this.socket === null) this.setStatus("closed");
  }
}

/** Browser transport: one wire frame per WebSocket text message. */
export function webSocketFactory(url: string): SocketLike {
  const ws = new WebSocket(url);
  const like: SocketLike = {
    send: (text) => ws.send(text),
    close: () => ws.close(),
    onopen: null,
    onmessage: null,
    onclose: null,
  };
  ws.onopen = () => like.onopen?.();
  ws.onmessage = (ev) => like.onmessage?.(String(ev.data));
  ws.onclose = () => like.onclose?.();
  ws.onerror = () => { /* onclose follows; the banner handles it */ };
  return like;
}

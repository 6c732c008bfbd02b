// Session lifecycle: connect, hello, fold messages into the view, emit
// driver inputs rate-matched to incoming state ticks, reconnect on drop.
// The socket and the clock are injectable so the whole flow runs in tests.

import type { Axes } from "./input";
import { ZERO_AXES, shapeAxes, shouldEmitInput } from "./input";
import { helloFrame, inputFrame, parseMessage } from "./protocol";
import type { ClientViewState } from "./view";
import { applyMessage, initialView, markDisconnected } from "./view";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((event: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
}

export interface SessionOptions {
  url: string;
  role: "driver" | "observer";
  socketFactory?: (url: string) => SocketLike;
  now?: () => number;
  onChange?: (view: ClientViewState) => void;
  reconnectDelayMs?: number;
  scheduleReconnect?: (fn: () => void, delayMs: number) => void;
}

export class Session {
  view: ClientViewState = initialView();

  private socket: SocketLike | null = null;
  private latestAxes: Axes = ZERO_AXES;
  private disposed = false;
  private readonly opts: Required<Pick<SessionOptions, "url" | "role">> &
    SessionOptions;

  constructor(opts: SessionOptions) {
    this.opts = opts;
  }

  connect(): void {
    if (this.disposed) return;
    const factory =
      this.opts.socketFactory ??
      ((url: string) => new WebSocket(url) as unknown as SocketLike);
    const socket = factory(this.opts.url);
    this.socket = socket;
    socket.onopen = () => {
      socket.send(helloFrame(this.opts.role));
    };
    socket.onmessage = (event) => {
      if (typeof event.data !== "string") return;
      const msg = parseMessage(event.data);
      if (msg === null) return;
      this.view = applyMessage(this.view, msg, this.now());
      // Rate-matched input: one message per received state tick,
      // carrying whatever the devices currently read.
      if (msg.type === "state" && shouldEmitInput(this.view)) {
        socket.send(
          inputFrame({ ...shapeAxes(this.latestAxes), tick: msg.tick }),
        );
      }
      this.opts.onChange?.(this.view);
    };
    socket.onclose = () => {
      this.view = markDisconnected(this.view);
      this.opts.onChange?.(this.view);
      if (!this.disposed) {
        const schedule =
          this.opts.scheduleReconnect ??
          ((fn: () => void, delay: number) => setTimeout(fn, delay));
        schedule(() => this.connect(), this.opts.reconnectDelayMs ?? 1000);
      }
    };
  }

  /** Devices write the latest axis readings here; sending is tick-driven. */
  setAxes(axes: Axes): void {
    this.latestAxes = axes;
  }

  dispose(): void {
    this.disposed = true;
    this.socket?.close();
  }

  private now(): number {
    return this.opts.now?.() ?? Date.now();
  }
}

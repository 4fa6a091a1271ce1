/**
 * Socket wrapper for one annotation session.
 *
 * The protocol is strictly request -> response: the server never pushes
 * unsolicited frames, so each outbound message can be paired with the next
 * inbound one. Replies also fan out to onMessage so the app can redraw on
 * every server turn without tracking who asked.
 */

import type { ClientMessage, ServerMessage } from './protocol.js';

/**
 * Structural socket type satisfied by both the browser WebSocket and the
 * `ws` package, so tests can run the real client against a real server.
 */
export interface WireSocket {
  // handler params are any so both the DOM WebSocket and `ws` fit
  onopen: ((ev: any) => void) | null;
  onmessage: ((ev: any) => void) | null;
  onclose: ((ev: any) => void) | null;
  onerror: ((ev: any) => void) | null;
  readyState: number;
  send(data: string): void;
  close(): void;
}

export type SocketFactory = (url: string) => WireSocket;

const RETRY_BASE_MS = 250;
const RETRY_CAP_MS = 4000;

export class Connection {
  /** Total client messages sent; the UI invariant is one per user action. */
  sent = 0;

  private socket: WireSocket | null = null;
  private everOpened = false;
  private closedByUs = false;
  private retryMs = RETRY_BASE_MS;
  private pending: Array<{
    resolve: (reply: ServerMessage) => void;
    reject: (err: Error) => void;
  }> = [];
  private listeners: Array<(msg: ServerMessage) => void> = [];

  constructor(
    private readonly url: string,
    private readonly factory: SocketFactory,
  ) {}

  onMessage(listener: (msg: ServerMessage) => void): void {
    this.listeners.push(listener);
  }

  /** Resolves once the socket is open; starts the reconnect loop. */
  open(): Promise<void> {
    return new Promise((resolve, reject) => {
      this.dial(resolve, reject);
    });
  }

  private dial(onFirstOpen?: () => void, onFirstFail?: (e: Error) => void) {
    const socket = this.factory(this.url);
    this.socket = socket;

    socket.onopen = () => {
      this.retryMs = RETRY_BASE_MS;
      const reconnecting = this.everOpened;
      this.everOpened = true;
      onFirstOpen?.();
      if (reconnecting) {
        // The server kept the session; ask it for the current view rather
        // than trusting anything rendered before the drop.
        void this.send({ type: 'sync' }).catch(() => undefined);
      }
    };

    socket.onmessage = (ev) => {
      const msg = JSON.parse(String(ev.data)) as ServerMessage;
      const waiter = this.pending.shift();
      waiter?.resolve(msg);
      for (const listener of this.listeners) listener(msg);
    };

    socket.onerror = () => {
      if (!this.everOpened) {
        onFirstFail?.(new Error(`cannot reach ${this.url}`));
      }
    };

    socket.onclose = () => {
      this.failPending(new Error('connection lost'));
      if (this.closedByUs) return;
      const delay = this.retryMs;
      this.retryMs = Math.min(this.retryMs * 2, RETRY_CAP_MS);
      setTimeout(() => {
        if (!this.closedByUs) this.dial();
      }, delay);
    };
  }

  private failPending(err: Error) {
    const waiters = this.pending.splice(0);
    for (const w of waiters) w.reject(err);
  }

  /**
   * Send one message; the promise resolves with the server's reply to it.
   * Rejects if the socket is down (the caller's action simply failed; the
   * reconnect loop will restore the view by itself).
   */
  send(msg: ClientMessage): Promise<ServerMessage> {
    const socket = this.socket;
    if (!socket || socket.readyState !== 1) {
      return Promise.reject(new Error('not connected'));
    }
    this.sent += 1;
    return new Promise((resolve, reject) => {
      this.pending.push({ resolve, reject });
      socket.send(JSON.stringify(msg));
    });
  }

  close(): void {
    this.closedByUs = true;
    this.failPending(new Error('closed'));
    this.socket?.close();
  }
}

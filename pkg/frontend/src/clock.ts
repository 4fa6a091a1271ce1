/**
 * Session clock. Key presses and synthesized token timings must be
 * comparable, so both draw from this one monotonic millisecond counter.
 * Times are relative to the most recent start(), matching the server's
 * expectation that a session's events begin near zero.
 */
export class SessionClock {
  private origin: number | null = null;

  constructor(private readonly monotonic: () => number = () => performance.now()) {}

  /** (Re)zero the clock; called when transcription begins or resets. */
  start(): void {
    this.origin = this.monotonic();
  }

  /** Milliseconds since start(); starts implicitly on first use. */
  now(): number {
    if (this.origin === null) this.start();
    return Math.max(0, Math.round(this.monotonic() - (this.origin as number)));
  }
}

/** Time-ordered sample ring for the strip charts.
 *
 * Keeps at most `windowS` seconds of history behind the newest sample.
 * A sample that steps backwards in time means the simulation was reset,
 * so the history is cleared rather than reordered: buffers stay
 * time-ordered by construction.
 */

export class TimeRing {
  readonly windowS: number;
  private ts: number[] = [];
  private vs: number[] = [];

  constructor(windowS = 60) {
    if (!(windowS > 0)) throw new Error("window must be positive");
    this.windowS = windowS;
  }

  push(t: number, v: number): void {
    if (!Number.isFinite(t)) return;
    const lastT = this.ts[this.ts.length - 1];
    if (lastT !== undefined && t < lastT) {
      this.ts = [];
      this.vs = [];
    }
    this.ts.push(t);
    this.vs.push(v);
    const cutoff = t - this.windowS;
    let drop = 0;
    while (drop < this.ts.length && (this.ts[drop] as number) < cutoff) {
      drop += 1;
    }
    if (drop > 0) {
      this.ts.splice(0, drop);
      this.vs.splice(0, drop);
    }
  }

  get length(): number {
    return this.ts.length;
  }

  get lastT(): number | undefined {
    return this.ts[this.ts.length - 1];
  }

  get lastV(): number | undefined {
    return this.vs[this.vs.length - 1];
  }

  clear(): void {
    this.ts = [];
    this.vs = [];
  }

  /** Snapshot views; callers must not mutate. */
  times(): readonly number[] {
    return this.ts;
  }

  values(): readonly number[] {
    return this.vs;
  }
}

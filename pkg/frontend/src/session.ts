/** Client-side session state: everything the dashboard renders.
 *
 * The session is a pure fold over received messages. Reloading the page
 * and replaying the stream reconstructs the identical view; no derived
 * quantity involves anything but fields of received messages. The one
 * computed channel is the translational error norm, which feeds the
 * error strip chart directly from err_x/err_y/err_z of each frame.
 */

import type {
  HelloPayload,
  ServerMessage,
  StateFrame,
} from "./protocol.js";
import { TimeRing } from "./ring.js";

export type Connection =
  | "connecting"
  | "connected"
  | "closed"
  | "failed";

export interface PendingCommand {
  kind: string;
  sentWall: number;
}

export const CHART_CHANNELS = ["k_d1", "k_d2", "err_norm", "f_z_E"] as const;
export type ChartChannel = (typeof CHART_CHANNELS)[number];

export class Session {
  connection: Connection = "connecting";
  hello: HelloPayload | null = null;
  latest: StateFrame | null = null;
  doneAt: number | null = null;
  lastError: string | null = null;
  /** Wall-clock ms of the last message, for the stale indicator. */
  lastMessageWall = 0;
  framesReceived = 0;
  acksReceived = 0;
  readonly pending: PendingCommand[] = [];
  readonly rings: Record<ChartChannel, TimeRing>;

  constructor(windowS = 60) {
    this.rings = {
      k_d1: new TimeRing(windowS),
      k_d2: new TimeRing(windowS),
      err_norm: new TimeRing(windowS),
      f_z_E: new TimeRing(windowS),
    };
  }

  /** Record a command send so its button can wait for the reply. */
  commandSent(kind: string, wallMs: number): void {
    this.pending.push({ kind, sentWall: wallMs });
  }

  pendingCount(kind: string): number {
    let n = 0;
    for (const p of this.pending) if (p.kind === kind) n += 1;
    return n;
  }

  apply(msg: ServerMessage, wallMs: number): void {
    this.lastMessageWall = wallMs;
    switch (msg.kind) {
      case "hello":
        this.hello = msg.payload;
        this.connection = "connected";
        break;
      case "state": {
        const f = msg.payload;
        // a reset moves time backwards; the rings clear themselves
        if (this.latest !== null && f.time_s < this.latest.time_s) {
          this.doneAt = null;
        }
        this.latest = f;
        this.framesReceived += 1;
        this.rings.k_d1.push(f.time_s, f.k_d1);
        this.rings.k_d2.push(f.time_s, f.k_d2);
        this.rings.err_norm.push(
          f.time_s, Math.hypot(f.err_x, f.err_y, f.err_z));
        this.rings.f_z_E.push(f.time_s, f.f_z_E);
        break;
      }
      case "ack":
        this.acksReceived += 1;
        this.pending.shift();
        break;
      case "error":
        this.lastError = msg.payload.message;
        this.pending.shift();
        break;
      case "done":
        this.doneAt = msg.payload.t_final;
        break;
    }
  }

  /** Stale means connected but silent past the given wall budget. */
  isStale(nowWall: number, budgetMs = 250): boolean {
    return (
      this.connection === "connected" &&
      this.doneAt === null &&
      this.lastMessageWall > 0 &&
      nowWall - this.lastMessageWall > budgetMs
    );
  }

  socketClosed(): void {
    this.connection = this.hello === null ? "failed" : "closed";
  }
}

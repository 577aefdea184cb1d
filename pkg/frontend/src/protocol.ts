/** Wire types for the newline-delimited JSON steering protocol.
 *
 * Every message in either direction is one JSON object per line with
 * fields {t, kind, payload}. Server kinds: hello, state, ack, error,
 * done. Client kinds: inject_event, set_param, pause, resume, reset.
 */

export interface PoseMsg {
  position: [number, number, number];
  quat: [number, number, number, number];
}

/** One control-cycle record as broadcast, plus probe and surface poses. */
export interface StateFrame {
  time_s: number;
  mode: string;
  a_h: number;
  a_p: number;
  a_f: number;
  a_n: number;
  a_b: number;
  k_d1: number;
  k_d2: number;
  err_x: number;
  err_y: number;
  err_z: number;
  err_rx: number;
  err_ry: number;
  err_rz: number;
  x1d_x: number;
  x1d_y: number;
  x1d_z: number;
  f_z_E: number;
  tau_n_norm: number;
  energy_residual: number;
  x_2d: number;
  x2: number;
  probe: PoseMsg;
  neck: PoseMsg;
}

export interface HelloPayload {
  scenario: Record<string, unknown>;
  columns: string[];
  dt: number;
  duration_s: number;
  speed: number;
}

export type ServerMessage =
  | { t: number; kind: "hello"; payload: HelloPayload }
  | { t: number; kind: "state"; payload: StateFrame }
  | { t: number; kind: "ack"; payload: { command: string } }
  | { t: number; kind: "error"; payload: { message: string } }
  | { t: number; kind: "done"; payload: { t_final: number } };

export type ClientCommand =
  | { kind: "inject_event"; payload: EventPayload }
  | { kind: "set_param"; payload: { path: string; value: unknown } }
  | { kind: "pause"; payload?: Record<string, never> }
  | { kind: "resume"; payload?: Record<string, never> }
  | { kind: "reset"; payload?: Record<string, never> };

export interface EventPayload {
  kind: string;
  start: number;
  end: number;
  params: Record<string, unknown>;
}

const SERVER_KINDS = new Set(["hello", "state", "ack", "error", "done"]);

/** Parse one server line. Throws with a readable message on junk. */
export function parseServerLine(line: string): ServerMessage {
  let obj: unknown;
  try {
    obj = JSON.parse(line);
  } catch (exc) {
    throw new Error(`not valid JSON: ${(exc as Error).message}`);
  }
  if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
    throw new Error("message must be a JSON object");
  }
  const msg = obj as { t?: unknown; kind?: unknown; payload?: unknown };
  if (typeof msg.t !== "number" || !Number.isFinite(msg.t)) {
    throw new Error("message missing numeric t");
  }
  if (typeof msg.kind !== "string" || !SERVER_KINDS.has(msg.kind)) {
    throw new Error(`unknown server message kind ${JSON.stringify(msg.kind)}`);
  }
  if (typeof msg.payload !== "object" || msg.payload === null) {
    throw new Error("message missing payload object");
  }
  return obj as ServerMessage;
}

/** Serialize a client command to one wire line (newline included). */
export function commandLine(cmd: ClientCommand): string {
  return JSON.stringify(cmd) + "\n";
}

/** Reassembles newline-delimited messages from arbitrary chunking. */
export class LineSplitter {
  private rest = "";

  push(chunk: string): string[] {
    const buffer = this.rest + chunk;
    const parts = buffer.split("\n");
    this.rest = parts.pop() ?? "";
    return parts.filter((line) => line.trim().length > 0);
  }

  /** Bytes still waiting for their newline. */
  get pending(): string {
    return this.rest;
  }
}

/** Builders and validation for client commands.
 *
 * Event injections are scheduled a short lead after the current
 * simulation time so the server applies them at the next step boundary
 * instead of in the past. Parameter names mirror the scenario schema;
 * the manual-JSON path validates against the same allowlists so a typo
 * is caught here instead of as a server rejection.
 */

import type { ClientCommand, EventPayload } from "./protocol.js";

export const EVENT_LEAD_S = 0.15;

export const EVENT_PARAM_KEYS: Record<string, ReadonlySet<string>> = {
  GraspProbe: new Set(["approach_s", "drag", "magnitude", "near_distance"]),
  ReleaseProbe: new Set<string>(),
  PushProbe: new Set(["force", "magnitude"]),
  BodyApproach: new Set(["side", "min_distance"]),
  BodyContact: new Set(["joint", "torque", "side", "min_distance"]),
  PatientMove: new Set(["displacement", "frame"]),
};

export type Side = "left" | "right";

function event(kind: string, now: number, durationS: number,
               params: Record<string, unknown>): ClientCommand {
  const start = now + EVENT_LEAD_S;
  const payload: EventPayload = { kind, start, end: start + durationS, params };
  return { kind: "inject_event", payload };
}

export function graspCommand(now: number, opts: {
  approachS: number; holdS: number; dragMagnitude: number;
}): ClientCommand {
  const params: Record<string, unknown> = { approach_s: opts.approachS };
  if (opts.dragMagnitude !== 0) {
    params.drag = "radial_out";
    params.magnitude = opts.dragMagnitude;
  }
  return event("GraspProbe", now, opts.approachS + opts.holdS, params);
}

export function releaseCommand(now: number, durationS: number): ClientCommand {
  return event("ReleaseProbe", now, durationS, {});
}

export function pushCommand(now: number, opts: {
  magnitude: number; durationS: number;
}): ClientCommand {
  return event("PushProbe", now, opts.durationS,
               { force: "radial_out", magnitude: opts.magnitude });
}

export function bodyApproachCommand(now: number, opts: {
  side: Side; minDistance: number; durationS: number;
}): ClientCommand {
  return event("BodyApproach", now, opts.durationS,
               { side: opts.side, min_distance: opts.minDistance });
}

export function bodyContactCommand(now: number, opts: {
  side: Side; joint: number; torque: number;
  minDistance: number; durationS: number;
}): ClientCommand {
  return event("BodyContact", now, opts.durationS, {
    side: opts.side, joint: opts.joint, torque: opts.torque,
    min_distance: opts.minDistance,
  });
}

export function patientMoveCommand(now: number, opts: {
  displacement: [number, number, number]; durationS: number;
}): ClientCommand {
  return event("PatientMove", now, opts.durationS,
               { displacement: opts.displacement, frame: "neck" });
}

export function setParamCommand(path: string, value: unknown): ClientCommand {
  return { kind: "set_param", payload: { path, value } };
}

export function pauseCommand(): ClientCommand {
  return { kind: "pause", payload: {} };
}

export function resumeCommand(): ClientCommand {
  return { kind: "resume", payload: {} };
}

export function resetCommand(): ClientCommand {
  return { kind: "reset", payload: {} };
}

export type ManualParse =
  | { ok: true; cmd: ClientCommand }
  | { ok: false; error: string };

const CLIENT_KINDS = new Set([
  "inject_event", "set_param", "pause", "resume", "reset",
]);

/** Validate the raw-JSON escape hatch. Nothing leaves on failure. */
export function parseManualCommand(text: string): ManualParse {
  let obj: unknown;
  try {
    obj = JSON.parse(text);
  } catch (exc) {
    return { ok: false, error: `not valid JSON: ${(exc as Error).message}` };
  }
  if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
    return { ok: false, error: "command must be a JSON object" };
  }
  const cmd = obj as { kind?: unknown; payload?: unknown };
  if (typeof cmd.kind !== "string" || !CLIENT_KINDS.has(cmd.kind)) {
    return {
      ok: false,
      error: `kind must be one of ${[...CLIENT_KINDS].join(", ")}`,
    };
  }
  if (cmd.kind === "inject_event") {
    const err = checkEventPayload(cmd.payload);
    if (err !== null) return { ok: false, error: err };
  } else if (cmd.kind === "set_param") {
    const p = cmd.payload as { path?: unknown; value?: unknown } | null;
    if (typeof p !== "object" || p === null || typeof p.path !== "string"
        || !("value" in p)) {
      return { ok: false, error: "set_param needs {path, value}" };
    }
  }
  return { ok: true, cmd: obj as ClientCommand };
}

function checkEventPayload(payload: unknown): string | null {
  if (typeof payload !== "object" || payload === null) {
    return "inject_event needs an event object payload";
  }
  const ev = payload as {
    kind?: unknown; start?: unknown; end?: unknown; params?: unknown;
  };
  if (typeof ev.kind !== "string" || !(ev.kind in EVENT_PARAM_KEYS)) {
    return `event kind must be one of ${Object.keys(EVENT_PARAM_KEYS).join(", ")}`;
  }
  if (typeof ev.start !== "number" || typeof ev.end !== "number"
      || !(ev.start < ev.end)) {
    return "event needs numeric start < end";
  }
  const params = ev.params ?? {};
  if (typeof params !== "object" || Array.isArray(params)) {
    return "event params must be an object";
  }
  const allowed = EVENT_PARAM_KEYS[ev.kind] as ReadonlySet<string>;
  for (const key of Object.keys(params as Record<string, unknown>)) {
    if (!allowed.has(key)) {
      return `unknown ${ev.kind} parameter ${JSON.stringify(key)}`;
    }
  }
  return null;
}

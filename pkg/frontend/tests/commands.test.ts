import { describe, expect, it } from "vitest";

import {
  bodyApproachCommand,
  bodyContactCommand,
  EVENT_LEAD_S,
  graspCommand,
  parseManualCommand,
  patientMoveCommand,
  pushCommand,
  releaseCommand,
  resetCommand,
  setParamCommand,
} from "../src/commands.js";
import type { EventPayload } from "../src/protocol.js";

function payload(cmd: { payload?: unknown }): EventPayload {
  return cmd.payload as EventPayload;
}

describe("event builders", () => {
  it("schedules a short lead after the current simulation time", () => {
    const cmd = pushCommand(4.0, { magnitude: 15, durationS: 0.8 });
    const ev = payload(cmd);
    expect(cmd.kind).toBe("inject_event");
    expect(ev.kind).toBe("PushProbe");
    expect(ev.start).toBeCloseTo(4.0 + EVENT_LEAD_S, 12);
    expect(ev.end).toBeCloseTo(ev.start + 0.8, 12);
    expect(ev.params).toEqual({ force: "radial_out", magnitude: 15 });
  });

  it("builds a grasp with approach plus hold and optional drag", () => {
    const cmd = graspCommand(2.0, { approachS: 1.5, holdS: 3, dragMagnitude: 0.03 });
    const ev = payload(cmd);
    expect(ev.kind).toBe("GraspProbe");
    expect(ev.end - ev.start).toBeCloseTo(4.5, 12);
    expect(ev.params).toEqual(
      { approach_s: 1.5, drag: "radial_out", magnitude: 0.03 });
    const still = payload(graspCommand(2.0, { approachS: 1, holdS: 2, dragMagnitude: 0 }));
    expect(still.params).toEqual({ approach_s: 1 });
  });

  it("keeps release parameterless", () => {
    expect(payload(releaseCommand(9, 1.5)).params).toEqual({});
  });

  it("carries the selected side through body events", () => {
    const right = payload(bodyApproachCommand(1, {
      side: "right", minDistance: 0.12, durationS: 3 }));
    expect(right.params.side).toBe("right");
    const left = payload(bodyContactCommand(1, {
      side: "left", joint: 3, torque: 2, minDistance: 0.12, durationS: 2.5 }));
    expect(left.params).toEqual(
      { side: "left", joint: 3, torque: 2, min_distance: 0.12 });
  });

  it("moves the patient in the surface frame", () => {
    const ev = payload(patientMoveCommand(0, {
      displacement: [0.045, 0, 0], durationS: 2 }));
    expect(ev.params).toEqual({ displacement: [0.045, 0, 0], frame: "neck" });
  });

  it("builds plain control commands", () => {
    expect(setParamCommand("gains.k2g", 5)).toEqual(
      { kind: "set_param", payload: { path: "gains.k2g", value: 5 } });
    expect(resetCommand().kind).toBe("reset");
  });
});

describe("parseManualCommand", () => {
  it("accepts a well-formed injection", () => {
    const result = parseManualCommand(JSON.stringify({
      kind: "inject_event",
      payload: { kind: "PushProbe", start: 5, end: 5.8,
                 params: { force: "radial_out", magnitude: 10 } },
    }));
    expect(result.ok).toBe(true);
  });

  it("rejects malformed JSON without producing a command", () => {
    const result = parseManualCommand("{nope");
    expect(result).toMatchObject({ ok: false });
    if (!result.ok) expect(result.error).toMatch(/not valid JSON/);
  });

  it("rejects unknown command kinds", () => {
    const result = parseManualCommand('{"kind": "destroy", "payload": {}}');
    if (result.ok) throw new Error("should have failed");
    expect(result.error).toMatch(/kind must be one of/);
  });

  it("rejects unknown event kinds and parameters by name", () => {
    const badKind = parseManualCommand(JSON.stringify({
      kind: "inject_event",
      payload: { kind: "Earthquake", start: 0, end: 1, params: {} },
    }));
    if (badKind.ok) throw new Error("should have failed");
    expect(badKind.error).toMatch(/event kind must be one of/);

    const badParam = parseManualCommand(JSON.stringify({
      kind: "inject_event",
      payload: { kind: "PushProbe", start: 0, end: 1,
                 params: { strength: 10 } },
    }));
    if (badParam.ok) throw new Error("should have failed");
    expect(badParam.error).toMatch(/unknown PushProbe parameter "strength"/);
  });

  it("rejects inverted event windows", () => {
    const result = parseManualCommand(JSON.stringify({
      kind: "inject_event",
      payload: { kind: "ReleaseProbe", start: 2, end: 1, params: {} },
    }));
    if (result.ok) throw new Error("should have failed");
    expect(result.error).toMatch(/start < end/);
  });

  it("requires path and value for set_param", () => {
    const result = parseManualCommand('{"kind": "set_param", "payload": {"path": "x"}}');
    if (result.ok) throw new Error("should have failed");
    expect(result.error).toMatch(/needs \{path, value\}/);
  });
});

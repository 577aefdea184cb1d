import { describe, expect, it } from "vitest";

import { TimeRing } from "../src/ring.js";

describe("TimeRing", () => {
  it("stores samples in arrival order", () => {
    const ring = new TimeRing(60);
    ring.push(0.0, 1);
    ring.push(0.1, 2);
    ring.push(0.2, 3);
    expect([...ring.times()]).toEqual([0.0, 0.1, 0.2]);
    expect([...ring.values()]).toEqual([1, 2, 3]);
    expect(ring.lastT).toBe(0.2);
    expect(ring.lastV).toBe(3);
  });

  it("evicts samples older than the window behind the newest", () => {
    const ring = new TimeRing(10);
    for (let t = 0; t <= 25; t += 1) ring.push(t, t);
    const ts = [...ring.times()];
    expect(Math.min(...ts)).toBeGreaterThanOrEqual(15);
    expect(Math.max(...ts)).toBe(25);
    expect(ts).toEqual([...ts].sort((a, b) => a - b));
  });

  it("clears on a time step backwards (simulation reset)", () => {
    const ring = new TimeRing(60);
    ring.push(5, 50);
    ring.push(6, 60);
    ring.push(0.04, 1);
    expect(ring.length).toBe(1);
    expect(ring.lastT).toBe(0.04);
  });

  it("ignores non-finite timestamps", () => {
    const ring = new TimeRing(60);
    ring.push(Number.NaN, 1);
    ring.push(Infinity, 2);
    expect(ring.length).toBe(0);
  });

  it("stays bounded under a long stream", () => {
    const ring = new TimeRing(60);
    for (let i = 0; i < 20000; i += 1) ring.push(i * 0.04, Math.sin(i));
    expect(ring.length).toBeLessThanOrEqual(60 / 0.04 + 2);
  });
});

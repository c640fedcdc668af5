import { describe, expect, it } from "vitest";

import { SweepClock, circleAtSample, circlePolyline } from "../src/osculating.js";
import { helixPayload } from "./helpers.js";

describe("osculating circle from payload", () => {
  const payload = helixPayload(257, 1.0);

  it("centers on the rendered evolute point of the same sample", () => {
    for (const i of [0, 17, 128, 255]) {
      const c = circleAtSample(payload, i);
      expect(c.center).toEqual(payload.evolute_positions[i]);
      expect(c.normal).toEqual(payload.B[i]);
    }
  });

  it("has radius 1/kappa and tracks kappa changes", () => {
    expect(circleAtSample(payload, 5).radius).toBe(1.0);
    const steeper = helixPayload(65, 2.0);
    expect(circleAtSample(steeper, 5).radius).toBe(0.5);
  });

  it("wraps the sample index", () => {
    const n = payload.t.length;
    expect(circleAtSample(payload, n + 3).sampleIndex).toBe(3);
    expect(circleAtSample(payload, -1).sampleIndex).toBe(n - 1);
  });

  it("passes through the curve point it osculates", () => {
    // |center - position| = radius: the circle touches the curve
    for (const i of [3, 99, 200]) {
      const c = circleAtSample(payload, i);
      const p = payload.positions[i];
      const d = Math.hypot(c.center[0] - p[0], c.center[1] - p[1],
                           c.center[2] - p[2]);
      expect(Math.abs(d - c.radius)).toBeLessThan(1e-12);
    }
  });

  it("polyline lies on the circle in its plane", () => {
    const c = circleAtSample(payload, 42);
    const pts = circlePolyline(c, 48);
    for (const p of pts) {
      const rel: [number, number, number] = [
        p[0] - c.center[0], p[1] - c.center[1], p[2] - c.center[2]];
      const r = Math.hypot(...rel);
      expect(Math.abs(r - c.radius)).toBeLessThan(1e-9);
      const planar = rel[0] * c.normal[0] + rel[1] * c.normal[1]
        + rel[2] * c.normal[2];
      expect(Math.abs(planar)).toBeLessThan(1e-9);
    }
  });
});

describe("sweep clock", () => {
  it("advances only while running and wraps", () => {
    const clock = new SweepClock(100); // samples per second
    expect(clock.tick(0, 50)).toBe(0);
    clock.start();
    clock.tick(1000, 50);
    const a = clock.tick(1100, 50); // +10 samples
    expect(a).toBeCloseTo(10, 6);
    clock.pause();
    const b = clock.tick(5000, 50); // paused: unchanged
    expect(b).toBeCloseTo(10, 6);
    clock.start();
    clock.tick(6000, 50);
    const c = clock.tick(6600, 50); // +60 wraps past 50
    expect(c).toBeCloseTo(20, 6);
  });
});

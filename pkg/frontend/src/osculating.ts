/**
 * Osculating-circle sweep.
 *
 * Everything is read off the service payload: at sample i the circle's
 * center is the evolute point, its radius is 1/kappa, and its plane normal
 * is the binormal.  The animation clock just moves i along the curve, so
 * the circle's center traces the rendered evolute by construction.
 */

import type { CurvePayload, Vec3 } from "./messages.js";

export interface CircleData {
  center: Vec3;
  radius: number;
  normal: Vec3;
  sampleIndex: number;
}

export function circleAtSample(payload: CurvePayload, index: number): CircleData {
  const n = payload.t.length;
  const i = ((Math.round(index) % n) + n) % n;
  return {
    center: payload.evolute_positions[i],
    radius: 1.0 / payload.kappa,
    normal: payload.B[i],
    sampleIndex: i,
  };
}

/** Polyline of the circle for rendering (pure arithmetic on payload data). */
export function circlePolyline(circle: CircleData, segments = 96): Vec3[] {
  const [nx, ny, nz] = circle.normal;
  // build an orthonormal basis of the circle plane
  let u: Vec3 = Math.abs(nx) < 0.9 ? [1, 0, 0] : [0, 1, 0];
  const dot = u[0] * nx + u[1] * ny + u[2] * nz;
  u = [u[0] - dot * nx, u[1] - dot * ny, u[2] - dot * nz];
  const ul = Math.hypot(...u);
  u = [u[0] / ul, u[1] / ul, u[2] / ul];
  const w: Vec3 = [
    ny * u[2] - nz * u[1],
    nz * u[0] - nx * u[2],
    nx * u[1] - ny * u[0],
  ];
  const pts: Vec3[] = [];
  for (let k = 0; k <= segments; k++) {
    const ang = (2 * Math.PI * k) / segments;
    const ca = Math.cos(ang) * circle.radius;
    const sa = Math.sin(ang) * circle.radius;
    pts.push([
      circle.center[0] + ca * u[0] + sa * w[0],
      circle.center[1] + ca * u[1] + sa * w[1],
      circle.center[2] + ca * u[2] + sa * w[2],
    ]);
  }
  return pts;
}

/** Animation clock mapping wall time to a fractional sample index. */
export class SweepClock {
  running = false;
  private phase = 0; // in samples
  private lastTick: number | null = null;

  constructor(public samplesPerSecond = 120) {}

  start(): void {
    this.running = true;
    this.lastTick = null;
  }

  pause(): void {
    this.running = false;
    this.lastTick = null;
  }

  tick(nowMs: number, sampleCount: number): number {
    if (this.running) {
      if (this.lastTick !== null) {
        this.phase += ((nowMs - this.lastTick) / 1000) * this.samplesPerSecond;
      }
      this.lastTick = nowMs;
    }
    if (sampleCount > 0) {
      this.phase = ((this.phase % sampleCount) + sampleCount) % sampleCount;
    }
    return this.phase;
  }
}

/**
 * Perspective projection to pixel coordinates - the same math the renderer
 * applies, exposed as pure functions so pixel-level contracts (circle
 * center on the evolute polyline, etc.) are testable without a GPU.
 */

import type { Vec3 } from "./messages.js";

export interface CameraSpec {
  position: Vec3;
  target: Vec3;
  up: Vec3;
  fovYDegrees: number;
  viewportWidth: number;
  viewportHeight: number;
}

export const DEFAULT_CAMERA: CameraSpec = {
  position: [0, 0, 12],
  target: [0, 0, 0],
  up: [0, 1, 0],
  fovYDegrees: 45,
  viewportWidth: 1280,
  viewportHeight: 800,
};

function sub(a: Vec3, b: Vec3): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

function cross(a: Vec3, b: Vec3): Vec3 {
  return [
    a[1] * b[2] - a[2] * b[1],
    a[2] * b[0] - a[0] * b[2],
    a[0] * b[1] - a[1] * b[0],
  ];
}

function dot(a: Vec3, b: Vec3): number {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

function normalize(a: Vec3): Vec3 {
  const l = Math.hypot(...a);
  return [a[0] / l, a[1] / l, a[2] / l];
}

/** Project a world point to pixel coordinates; null when behind the eye. */
export function projectToPixels(p: Vec3, cam: CameraSpec): [number, number] | null {
  const forward = normalize(sub(cam.target, cam.position));
  const right = normalize(cross(forward, cam.up));
  const upv = cross(right, forward);
  const rel = sub(p, cam.position);
  const x = dot(rel, right);
  const y = dot(rel, upv);
  const z = dot(rel, forward); // depth along the view axis
  if (z <= 1e-9) {
    return null;
  }
  const fovY = (cam.fovYDegrees * Math.PI) / 180;
  const halfH = Math.tan(fovY / 2);
  const aspect = cam.viewportWidth / cam.viewportHeight;
  const ndcX = x / (z * halfH * aspect);
  const ndcY = y / (z * halfH);
  return [
    (ndcX * 0.5 + 0.5) * cam.viewportWidth,
    (0.5 - ndcY * 0.5) * cam.viewportHeight,
  ];
}

/** Pixel distance from a point to a projected polyline (segment-wise). */
export function pixelDistanceToPolyline(point: Vec3, polyline: Vec3[],
                                        cam: CameraSpec): number {
  const pp = projectToPixels(point, cam);
  if (!pp) {
    return Infinity;
  }
  let best = Infinity;
  let prev: [number, number] | null = null;
  for (const vertex of polyline) {
    const q = projectToPixels(vertex, cam);
    if (!q) {
      prev = null;
      continue;
    }
    if (prev) {
      best = Math.min(best, distToSegment(pp, prev, q));
    } else {
      best = Math.min(best, Math.hypot(pp[0] - q[0], pp[1] - q[1]));
    }
    prev = q;
  }
  return best;
}

function distToSegment(p: [number, number], a: [number, number],
                       b: [number, number]): number {
  const vx = b[0] - a[0];
  const vy = b[1] - a[1];
  const wx = p[0] - a[0];
  const wy = p[1] - a[1];
  const len2 = vx * vx + vy * vy;
  const t = len2 > 0 ? Math.min(1, Math.max(0, (wx * vx + wy * vy) / len2)) : 0;
  return Math.hypot(wx - t * vx, wy - t * vy);
}

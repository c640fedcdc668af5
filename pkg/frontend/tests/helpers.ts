import type { CurvePayload, Vec3 } from "../src/messages.js";

/**
 * Synthetic payload from the closed-form curve with curvature = torsion = 1
 * (what the service returns for amplitude 0): positions, frames and evolute
 * are all analytic, so tests have exact data without a running service.
 */
export function helixPayload(n = 257, kappa = 1.0): CurvePayload {
  const w = Math.SQRT2;
  const t: number[] = [];
  const positions: Vec3[] = [];
  const T: Vec3[] = [];
  const N: Vec3[] = [];
  const B: Vec3[] = [];
  const evolute: Vec3[] = [];
  const midpoint: Vec3[] = [];
  for (let i = 0; i < n; i++) {
    const s = (2 * Math.PI * i) / (n - 1);
    t.push(s);
    const sw = Math.sin(w * s);
    const cw = Math.cos(w * s);
    const pos: Vec3 = [s / 2 + sw / (2 * w), (1 - cw) / 2, s / 2 - sw / (2 * w)];
    const tang: Vec3 = [(1 + cw) / 2, sw / w, (1 - cw) / 2];
    const norm: Vec3 = [-sw / w, cw, sw / w];
    const bin: Vec3 = [
      tang[1] * norm[2] - tang[2] * norm[1],
      tang[2] * norm[0] - tang[0] * norm[2],
      tang[0] * norm[1] - tang[1] * norm[0],
    ];
    positions.push(pos);
    T.push(tang);
    N.push(norm);
    B.push(bin);
    evolute.push([pos[0] + norm[0] / kappa, pos[1] + norm[1] / kappa,
                  pos[2] + norm[2] / kappa]);
    midpoint.push([pos[0] + norm[0] / (2 * kappa), pos[1] + norm[1] / (2 * kappa),
                   pos[2] + norm[2] / (2 * kappa)]);
  }
  return {
    kappa,
    t,
    positions,
    T,
    N,
    B,
    v: t.map(() => 1),
    tau: t.map(() => 1),
    evolute_positions: evolute,
    midpoint_positions: midpoint,
    symmetry_lines: [
      { t_star: Math.PI / 2, base: positions[Math.floor(n / 4)], direction: N[Math.floor(n / 4)] },
      { t_star: (3 * Math.PI) / 2, base: positions[Math.floor((3 * n) / 4)], direction: N[Math.floor((3 * n) / 4)] },
    ],
    diameter: 7,
    closure_gap: 1,
    target: { p: 1, q: 3 },
  };
}

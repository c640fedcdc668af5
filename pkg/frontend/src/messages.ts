/**
 * Wire schema of the local exploration service.
 *
 * Every request is POSTed to /api as {kind, session, payload}; responses are
 * {ok: true, payload} or {ok: false, error: {code, message}}.  The explorer
 * renders exclusively from these payloads: it never derives geometry on its
 * own beyond drawing primitives the payload describes.
 */

export type Vec3 = [number, number, number];

export interface RequestEnvelope {
  kind: string;
  session?: string | null;
  payload?: Record<string, unknown>;
}

export interface ErrorBody {
  code: string;
  message: string;
}

export interface ResponseEnvelope<P> {
  ok: boolean;
  payload?: P;
  error?: ErrorBody;
}

export interface ParamRanges {
  kappa: [number, number];
  a: [number, number];
  b3: [number, number];
}

export interface CreateSessionPayload {
  session: string;
  ranges: ParamRanges;
}

export interface Residuals {
  d: number;
  angle_defect: number;
  angle_measured: number;
  norm: number;
}

export interface SetParamsPayload {
  residuals: Residuals;
  solver_ready: boolean;
  rough_closing_threshold: number;
  ranges: ParamRanges;
}

export interface SymmetryLineData {
  t_star: number;
  base: Vec3;
  direction: Vec3;
}

export interface CurvePayload {
  kappa: number;
  t: number[];
  positions: Vec3[];
  T: Vec3[];
  N: Vec3[];
  B: Vec3[];
  v: number[];
  tau: number[];
  evolute_positions: Vec3[];
  midpoint_positions: Vec3[];
  symmetry_lines: SymmetryLineData[];
  diameter: number;
  closure_gap: number;
  target: { p: number; q: number };
}

export interface MeshPayload {
  vertices: Vec3[];
  normals: Vec3[];
  faces: [number, number, number][];
  rings: number;
  ring_size: number;
  radius_warning: boolean;
  radius: number;
}

export type SolverState = "idle" | "running" | "done" | "failed";

export interface SolveResultData {
  kappa: number;
  a: number;
  b3: number;
  residual_norm: number;
  iterations: number;
  converged: boolean;
}

export interface FamilyMember {
  kappa: number;
  a: number;
  b3: number;
  residual_norm: number;
}

export interface StatusPayload {
  state: SolverState;
  running_kind: "solve" | "family" | null;
  trace: [number, number, number, number, number][];
  result: SolveResultData | null;
  family: FamilyMember[];
  reason: string | null;
}

export interface SolveParams {
  kappa: number;
  a: number;
  b3: number;
  form: "sqrt" | "exp";
  target: { p: number; q: number };
  harmonics?: [number, number][];
}

export function isErrorResponse(body: unknown): body is { ok: false; error: ErrorBody } {
  return (
    typeof body === "object" && body !== null &&
    (body as { ok?: unknown }).ok === false &&
    typeof (body as { error?: unknown }).error === "object"
  );
}

export function assertCurvePayload(p: unknown): CurvePayload {
  const obj = p as CurvePayload;
  if (!obj || !Array.isArray(obj.positions) || !Array.isArray(obj.evolute_positions)
      || typeof obj.kappa !== "number") {
    throw new Error("malformed curve payload");
  }
  if (obj.positions.length !== obj.t.length
      || obj.evolute_positions.length !== obj.t.length) {
    throw new Error("curve payload arrays disagree in length");
  }
  return obj;
}

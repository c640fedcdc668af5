/**
 * Explorer state: slider values clamped to service-advertised ranges,
 * residual gauges, the solver-ready gate, solver status, and the family
 * scrubber (which replays stored members and never re-solves).
 */

import type {
  FamilyMember, ParamRanges, Residuals, SetParamsPayload, SolveParams,
  SolverState, SolveResultData,
} from "./messages.js";

export const DEFAULT_RANGES: ParamRanges = {
  kappa: [0.05, 5.0],
  a: [0.0, 2.5],
  b3: [-1.0, 1.0],
};

export interface GaugeState {
  d: number | null;
  angleDefect: number | null;
  norm: number | null;
  solverReady: boolean;
  threshold: number;
}

export class ExplorerState {
  params: SolveParams = {
    kappa: 1.0, a: 0.5, b3: 0.0, form: "sqrt", target: { p: 1, q: 3 },
  };
  ranges: ParamRanges = DEFAULT_RANGES;
  gauges: GaugeState = {
    d: null, angleDefect: null, norm: null, solverReady: false, threshold: 0.3,
  };
  solverState: SolverState = "idle";
  /** Exact residual norm from the service's solve result (displayed as-is). */
  finalResidual: number | null = null;
  lastResult: SolveResultData | null = null;
  family: FamilyMember[] = [];
  familyIndex = 0;
  staleView = false;

  setRanges(ranges: ParamRanges): void {
    this.ranges = ranges;
  }

  clamp(name: keyof ParamRanges, value: number): number {
    const [lo, hi] = this.ranges[name];
    return Math.min(hi, Math.max(lo, value));
  }

  setParam(name: "kappa" | "a" | "b3", value: number): number {
    const clamped = this.clamp(name, value);
    this.params[name] = clamped;
    this.staleView = true;
    return clamped;
  }

  applySetParamsResponse(resp: SetParamsPayload): void {
    this.gauges = {
      d: resp.residuals.d,
      angleDefect: resp.residuals.angle_defect,
      norm: resp.residuals.norm,
      solverReady: resp.solver_ready,
      threshold: resp.rough_closing_threshold,
    };
    this.ranges = resp.ranges;
    this.staleView = false;
  }

  /** Solve button availability: the rough-closing gate plus not-running. */
  solveEnabled(): boolean {
    return this.gauges.solverReady && this.solverState !== "running";
  }

  applyStatus(state: SolverState, result: SolveResultData | null,
              family: FamilyMember[]): void {
    this.solverState = state;
    if (result) {
      this.lastResult = result;
      if (state === "done" && result.converged) {
        // display the service value verbatim; no reformatting
        this.finalResidual = result.residual_norm;
      }
    }
    if (family.length) {
      this.family = family;
      this.familyIndex = Math.min(this.familyIndex, family.length - 1);
    }
  }

  /**
   * Family scrubbing replays a precomputed member: it updates the slider
   * model and reports which parameters to preview, but must never trigger
   * a solve.
   */
  scrubFamily(index: number): FamilyMember | null {
    if (!this.family.length) {
      return null;
    }
    this.familyIndex = Math.min(Math.max(index, 0), this.family.length - 1);
    const member = this.family[this.familyIndex];
    this.params.kappa = member.kappa;
    this.params.a = member.a;
    this.params.b3 = member.b3;
    this.staleView = true;
    return member;
  }
}

/** Format a gauge value for display; exact residuals stay exact. */
export function formatGauge(value: number | null): string {
  if (value === null) {
    return "—";
  }
  return value.toExponential(3);
}

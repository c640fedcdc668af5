/**
 * Service client: request envelopes, per-category in-flight bookkeeping,
 * stale-response discard by sequence number, and a trailing-edge debouncer.
 *
 * The concurrency contract: at most one in-flight request per category
 * (preview, status, ...).  A response is applied only if no newer request
 * of the same category has been issued meanwhile.
 */

import type { RequestEnvelope, ResponseEnvelope } from "./messages.js";

export type Fetcher = (body: RequestEnvelope) => Promise<ResponseEnvelope<unknown>>;

export function httpFetcher(baseUrl: string): Fetcher {
  return async (body) => {
    const res = await fetch(`${baseUrl}/api`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return (await res.json()) as ResponseEnvelope<unknown>;
  };
}

export class ServiceClient {
  private seq: Record<string, number> = {};
  private inFlight: Record<string, number | undefined> = {};
  session: string | null = null;

  constructor(private fetcher: Fetcher) {}

  async createSession(): Promise<unknown> {
    const resp = await this.fetcher({ kind: "create_session" });
    if (!resp.ok || !resp.payload) {
      throw new Error(`create_session failed: ${resp.error?.message}`);
    }
    this.session = (resp.payload as { session: string }).session;
    return resp.payload;
  }

  /** Plain request without sequencing (solve, status, get_family). */
  async request<P>(kind: string, payload: Record<string, unknown> = {}): Promise<P> {
    const resp = await this.fetcher({ kind, session: this.session, payload });
    if (!resp.ok) {
      const err = new Error(resp.error?.message ?? "request failed");
      (err as Error & { code?: string }).code = resp.error?.code;
      throw err;
    }
    return resp.payload as P;
  }

  hasInFlight(category: string): boolean {
    return this.inFlight[category] !== undefined;
  }

  /**
   * Sequenced request: the result is delivered only when no newer request
   * of the same category was issued while this one was on the wire
   * (stale responses resolve to null).
   */
  async sequenced<P>(category: string, kind: string,
                     payload: Record<string, unknown> = {}): Promise<P | null> {
    const mySeq = (this.seq[category] ?? 0) + 1;
    this.seq[category] = mySeq;
    this.inFlight[category] = mySeq;
    try {
      const result = await this.request<P>(kind, payload);
      if (this.seq[category] !== mySeq) {
        return null; // a newer request superseded this one
      }
      return result;
    } finally {
      if (this.inFlight[category] === mySeq) {
        this.inFlight[category] = undefined;
      }
    }
  }
}

/**
 * Trailing-edge debouncer:  burst of calls -> a single execution after
 * `delayMs` of quiet, always with the latest arguments.
 */
export class Debouncer<A extends unknown[]> {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private lastArgs: A | null = null;
  calls = 0;

  constructor(private fn: (...args: A) => void, private delayMs: number) {}

  fire(...args: A): void {
    this.lastArgs = args;
    if (this.timer !== null) {
      clearTimeout(this.timer);
    }
    this.timer = setTimeout(() => {
      this.timer = null;
      this.calls += 1;
      if (this.lastArgs) {
        this.fn(...this.lastArgs);
      }
    }, this.delayMs);
  }

  cancel(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }
}

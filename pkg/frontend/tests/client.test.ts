import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { Debouncer, ServiceClient } from "../src/client.js";
import type { RequestEnvelope, ResponseEnvelope } from "../src/messages.js";

type Resolver = (value: ResponseEnvelope<unknown>) => void;

/** Fetcher whose responses are resolved manually, in any order. */
function manualFetcher() {
  const pending: { body: RequestEnvelope; resolve: Resolver }[] = [];
  const fetcher = (body: RequestEnvelope) =>
    new Promise<ResponseEnvelope<unknown>>((resolve) => {
      pending.push({ body, resolve });
    });
  return { fetcher, pending };
}

describe("debouncer", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("coalesces a burst into one trailing call with the latest args", () => {
    const seen: number[] = [];
    const d = new Debouncer((v: number) => seen.push(v), 100);
    for (let i = 0; i < 25; i++) {
      d.fire(i);
      vi.advanceTimersByTime(10); // faster than the delay
    }
    expect(seen).toEqual([]);
    vi.advanceTimersByTime(200);
    expect(seen).toEqual([24]);
    expect(d.calls).toBe(1);
  });

  it("fires again after quiet periods", () => {
    const seen: number[] = [];
    const d = new Debouncer((v: number) => seen.push(v), 50);
    d.fire(1);
    vi.advanceTimersByTime(80);
    d.fire(2);
    vi.advanceTimersByTime(80);
    expect(seen).toEqual([1, 2]);
  });
});

describe("sequenced requests", () => {
  it("discards stale responses by sequence number", async () => {
    const { fetcher, pending } = manualFetcher();
    const client = new ServiceClient(fetcher);
    client.session = "s";
    const first = client.sequenced<{ n: number }>("preview", "get_curve", { n: 1 });
    const second = client.sequenced<{ n: number }>("preview", "get_curve", { n: 2 });
    expect(pending.length).toBe(2);
    // resolve out of order: the late first response must be discarded
    pending[1].resolve({ ok: true, payload: { n: 2 } });
    pending[0].resolve({ ok: true, payload: { n: 1 } });
    expect(await first).toBeNull();
    expect(await second).toEqual({ n: 2 });
  });

  it("tracks in-flight state per category", async () => {
    const { fetcher, pending } = manualFetcher();
    const client = new ServiceClient(fetcher);
    client.session = "s";
    const p = client.sequenced("preview", "get_curve");
    expect(client.hasInFlight("preview")).toBe(true);
    expect(client.hasInFlight("status")).toBe(false);
    pending[0].resolve({ ok: true, payload: {} });
    await p;
    expect(client.hasInFlight("preview")).toBe(false);
  });

  it("surfaces service error codes", async () => {
    const client = new ServiceClient(async () => ({
      ok: false,
      error: { code: "AlreadyRunning", message: "busy" },
    }));
    client.session = "s";
    await expect(client.request("solve")).rejects.toMatchObject({
      code: "AlreadyRunning",
    });
  });
});

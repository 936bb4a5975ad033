import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { FieldError, PredictionScheduler, fetchImportance, postPredict } from "../src/api.js";
import type { PredictionResponse, Spec } from "../src/types.js";
import { SCHEMA, fakePredict } from "./fake_service.js";
import { defaultSpec } from "../src/form.js";

/** Yield enough microtask turns for awaited promise chains to settle. */
async function flushMicrotasks(): Promise<void> {
  for (let i = 0; i < 8; i++) await Promise.resolve();
}

describe("PredictionScheduler", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("collapses edits inside the debounce window into one request", async () => {
    const calls: Spec[] = [];
    const scheduler = new PredictionScheduler(async (spec) => {
      calls.push(spec);
      return fakePredict(spec);
    }, 250);
    const applied: PredictionResponse[] = [];
    for (const threads of [4, 8, 12, 16]) {
      scheduler.schedule({ ...defaultSpec(SCHEMA), cpu_thread_count: threads },
                         (r) => applied.push(r), () => {});
      await vi.advanceTimersByTimeAsync(100);
    }
    await vi.advanceTimersByTimeAsync(400);
    await flushMicrotasks();
    expect(calls).toHaveLength(1);
    expect(calls[0].cpu_thread_count).toBe(16);
    expect(applied).toHaveLength(1);
  });

  it("separated edits each fire", async () => {
    const calls: Spec[] = [];
    const scheduler = new PredictionScheduler(async (spec) => {
      calls.push(spec);
      return fakePredict(spec);
    }, 250);
    scheduler.schedule({ ...defaultSpec(SCHEMA), cpu_thread_count: 4 }, () => {}, () => {});
    await vi.advanceTimersByTimeAsync(300);
    scheduler.schedule({ ...defaultSpec(SCHEMA), cpu_thread_count: 8 }, () => {}, () => {});
    await vi.advanceTimersByTimeAsync(300);
    expect(calls).toHaveLength(2);
  });

  it("never applies a superseded response", async () => {
    const gates: Array<() => void> = [];
    const scheduler = new PredictionScheduler(async (spec) => {
      await new Promise<void>((resolve) => gates.push(resolve));
      return fakePredict(spec);
    }, 10);
    const applied: number[] = [];
    scheduler.schedule({ ...defaultSpec(SCHEMA), cpu_thread_count: 4 },
                       (r) => applied.push(Number(r.spec.cpu_thread_count)), () => {});
    await vi.advanceTimersByTimeAsync(20);
    scheduler.schedule({ ...defaultSpec(SCHEMA), cpu_thread_count: 8 },
                       (r) => applied.push(Number(r.spec.cpu_thread_count)), () => {});
    await vi.advanceTimersByTimeAsync(20);
    expect(gates).toHaveLength(2);
    gates[1]();           // newest resolves first
    await flushMicrotasks();
    gates[0]();           // stale resolves later
    await flushMicrotasks();
    expect(applied).toEqual([8]);
  });
});

describe("fetch wrappers", () => {
  afterEach(() => vi.unstubAllGlobals());

  it("postPredict raises FieldError with the offending field on 422", async () => {
    vi.stubGlobal("fetch", async () => new Response(
      JSON.stringify({ error: "unknown vendor: 'X'", field: "cpu_vendor" }),
      { status: 422, headers: { "content-type": "application/json" } }));
    await expect(postPredict({} as Spec)).rejects.toMatchObject({
      field: "cpu_vendor",
    });
    await expect(postPredict({} as Spec)).rejects.toBeInstanceOf(FieldError);
  });

  it("fetchImportance returns null on 404", async () => {
    vi.stubGlobal("fetch", async () => new Response(
      JSON.stringify({ error: "no importance matrix available" }), { status: 404 }));
    expect(await fetchImportance()).toBeNull();
  });

  it("fetchImportance returns null when the service is down", async () => {
    vi.stubGlobal("fetch", async () => { throw new TypeError("network down"); });
    expect(await fetchImportance()).toBeNull();
  });
});

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { startApp } from "../src/app.js";
import type { PredictionResponse, Spec } from "../src/types.js";
import { IMPORTANCE, SCHEMA, fakePredict } from "./fake_service.js";

function mountPoint(): HTMLElement {
  document.body.innerHTML = '<div id="app"></div>';
  return document.getElementById("app")!;
}

function countingPredict() {
  const calls: Spec[] = [];
  const send = async (spec: Spec): Promise<PredictionResponse> => {
    calls.push(spec);
    return fakePredict(spec);
  };
  return { calls, send };
}

async function boot(send = fakePredict, importance = async () => IMPORTANCE) {
  const handle = await startApp(mountPoint(), {
    schema: async () => SCHEMA,
    predict: send,
    importance,
    debounceMs: 250,
  });
  await vi.advanceTimersByTimeAsync(300); // settle the initial prediction
  return handle;
}

function setNumber(id: string, value: number): void {
  const input = document.getElementById(id) as HTMLInputElement;
  input.value = String(value);
  input.dispatchEvent(new Event("input", { bubbles: true }));
}

function cardValue(metricId: string): string {
  const card = document.querySelector(`[data-metric="${metricId}"] .metric-value`);
  return card?.textContent ?? "";
}

beforeEach(() => {
  vi.useFakeTimers();
});

afterEach(() => {
  vi.useRealTimers();
});

describe("panel layout", () => {
  it("renders nine cards in the three-group layout", async () => {
    await boot();
    const groups = document.querySelectorAll(".metric-group");
    expect(groups).toHaveLength(3);
    const headings = [...groups].map((g) => g.querySelector("h2")!.textContent);
    expect(headings).toEqual(["latency", "responsiveness", "smoothness"]);
    for (const group of groups) {
      expect(group.querySelectorAll(".metric-card")).toHaveLength(3);
    }
    expect(document.querySelectorAll(".metric-card")).toHaveLength(9);
  });

  it("renders every card from the service response at one decimal", async () => {
    const { calls, send } = countingPredict();
    await boot(send);
    const response = await fakePredict(calls[calls.length - 1]);
    for (const metric of SCHEMA.metrics) {
      const expected = `${Math.max(0, response.predictions[metric.id]).toFixed(1)} ${metric.unit}`;
      expect(cardValue(metric.id)).toBe(expected);
    }
  });
});

describe("live prediction on edit", () => {
  it("two rapid thread-count edits produce exactly one surviving request", async () => {
    const { calls, send } = countingPredict();
    await boot(send);
    const before = calls.length;

    setNumber("a-cpu_thread_count", 12);
    await vi.advanceTimersByTimeAsync(100); // inside the debounce window
    setNumber("a-cpu_thread_count", 16);
    await vi.advanceTimersByTimeAsync(300);

    expect(calls.length).toBe(before + 1);
    expect(calls[calls.length - 1].cpu_thread_count).toBe(16);

    const response = await fakePredict(calls[calls.length - 1]);
    for (const metric of SCHEMA.metrics) {
      const expected = `${Math.max(0, response.predictions[metric.id]).toFixed(1)} ${metric.unit}`;
      expect(cardValue(metric.id)).toBe(expected);
    }
  });

  it("discards a stale response that resolves after a newer one", async () => {
    let release: (() => void) | null = null;
    const send = async (spec: Spec): Promise<PredictionResponse> => {
      if (spec.cpu_thread_count === 12 && release === null) {
        await new Promise<void>((resolve) => { release = resolve; });
      }
      return fakePredict(spec);
    };
    await boot(send);

    setNumber("a-cpu_thread_count", 12);
    await vi.advanceTimersByTimeAsync(300); // request for 12 now hangs
    setNumber("a-cpu_thread_count", 16);
    await vi.advanceTimersByTimeAsync(300); // request for 16 resolves
    const fresh = cardValue("startup_time");
    release!();
    await vi.advanceTimersByTimeAsync(10);

    expect(cardValue("startup_time")).toBe(fresh);
  });

  it("changing only the refresh rate changes no displayed prediction", async () => {
    await boot();
    const before = SCHEMA.metrics.map((m) => cardValue(m.id));
    setNumber("a-display_refresh_hz", 120);
    await vi.advanceTimersByTimeAsync(300);
    expect(SCHEMA.metrics.map((m) => cardValue(m.id))).toEqual(before);
  });

  it("marks the refresh-rate control as unused by the model", async () => {
    await boot();
    const row = document.getElementById("a-display_refresh_hz")!.closest(".spec-row")!;
    expect(row.querySelector(".inert-note")!.textContent).toBe("not used by model");
  });

  it("highlights the offending control on a field error", async () => {
    const send = async (spec: Spec): Promise<PredictionResponse> => {
      const response = await fakePredict(spec);
      if (Number(spec.cpu_thread_count) > 30) {
        const { FieldError } = await import("../src/api.js");
        throw new FieldError("invalid", "cpu_thread_count");
      }
      return response;
    };
    await boot(send);
    setNumber("a-cpu_thread_count", 31);
    await vi.advanceTimersByTimeAsync(300);
    const input = document.getElementById("a-cpu_thread_count")!;
    expect(input.classList.contains("invalid")).toBe(true);
  });
});

describe("compare mode", () => {
  it("identical specs show all-zero deltas", async () => {
    await boot();
    (document.getElementById("compare-toggle") as HTMLButtonElement).click();
    await vi.advanceTimersByTimeAsync(300);
    for (const metric of SCHEMA.metrics) {
      const delta = document.querySelector(
        `[data-metric="${metric.id}"] .metric-delta`)!;
      expect(delta.classList.contains("hidden")).toBe(false);
      expect(delta.textContent).toContain("0.0");
      expect(delta.textContent).not.toContain("-");
      expect(delta.classList.contains("neutral")).toBe(true);
    }
  });

  it("a lower latency on candidate B is colored better", async () => {
    await boot();
    (document.getElementById("compare-toggle") as HTMLButtonElement).click();
    await vi.advanceTimersByTimeAsync(300);
    setNumber("b-cpu_thread_count", 16); // faster device: latency drops
    await vi.advanceTimersByTimeAsync(300);
    const delta = document.querySelector(
      '[data-metric="startup_time"] .metric-delta')!;
    expect(delta.textContent!.includes("-")).toBe(true);
    expect(delta.classList.contains("better")).toBe(true);
    const smooth = document.querySelector(
      '[data-metric="window_animation"] .metric-delta')!;
    expect(smooth.textContent!.startsWith("Δ +")).toBe(true);
    expect(smooth.classList.contains("better")).toBe(true);
  });

  it("deltas equal the arithmetic difference of the displayed values", async () => {
    const { calls, send } = countingPredict();
    await boot(send);
    (document.getElementById("compare-toggle") as HTMLButtonElement).click();
    await vi.advanceTimersByTimeAsync(300);
    setNumber("b-ram_capacity_gb", 16);
    await vi.advanceTimersByTimeAsync(300);
    const aSpec = calls.find((s) => s.ram_capacity_gb === 8)!;
    const bSpec = calls[calls.length - 1];
    const aResponse = await fakePredict(aSpec);
    const bResponse = await fakePredict(bSpec);
    for (const metric of SCHEMA.metrics) {
      const shownA = Number(Math.max(0, aResponse.predictions[metric.id]).toFixed(1));
      const shownB = Number(Math.max(0, bResponse.predictions[metric.id]).toFixed(1));
      const deltaText = document.querySelector(
        `[data-metric="${metric.id}"] .metric-delta`)!.textContent!;
      const numeric = Number(deltaText.replace("Δ", "").split(" ").filter(Boolean)[0]);
      expect(numeric).toBeCloseTo(shownB - shownA, 6);
    }
  });
});

describe("importance tab", () => {
  it("renders the heatmap when the endpoint is available", async () => {
    await boot();
    const tab = document.getElementById("importance-tab");
    expect(tab).not.toBeNull();
    const cells = tab!.querySelectorAll("td");
    expect(cells).toHaveLength(90);
  });

  it("is hidden when the endpoint is missing", async () => {
    await boot(fakePredict, async () => null);
    expect(document.getElementById("importance-tab")).toBeNull();
  });
});

describe("schema failure", () => {
  it("shows a blocking error banner with a retry control", async () => {
    const mount = mountPoint();
    await expect(startApp(mount, {
      schema: async () => { throw new Error("connection refused"); },
      predict: fakePredict,
      importance: async () => null,
    })).rejects.toThrow("connection refused");
    const banner = mount.querySelector(".error-banner");
    expect(banner).not.toBeNull();
    expect(banner!.querySelector("button")!.textContent).toBe("Retry");
  });
});

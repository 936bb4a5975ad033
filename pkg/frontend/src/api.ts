import type { ImportanceDoc, PredictionResponse, SchemaDoc, Spec } from "./types.js";

/** A 422 from the service, carrying the offending field name. */
export class FieldError extends Error {
  constructor(message: string, readonly field: string) {
    super(message);
  }
}

export class ServiceUnavailableError extends Error {}

async function getJson<T>(url: string): Promise<T> {
  let res: Response;
  try {
    res = await fetch(url);
  } catch (err) {
    throw new ServiceUnavailableError(`cannot reach ${url}: ${err}`);
  }
  if (!res.ok) throw new Error(`${url} -> ${res.status}`);
  return res.json() as Promise<T>;
}

export async function fetchSchema(base = ""): Promise<SchemaDoc> {
  return getJson<SchemaDoc>(`${base}/api/schema`);
}

/** Returns null when the service has no importance matrix (404). */
export async function fetchImportance(base = ""): Promise<ImportanceDoc | null> {
  let res: Response;
  try {
    res = await fetch(`${base}/api/importance`);
  } catch {
    return null;
  }
  if (res.status === 404) return null;
  if (!res.ok) return null;
  return res.json() as Promise<ImportanceDoc>;
}

export async function postPredict(spec: Spec, base = ""): Promise<PredictionResponse> {
  let res: Response;
  try {
    res = await fetch(`${base}/api/predict`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ spec }),
    });
  } catch (err) {
    throw new ServiceUnavailableError(`prediction request failed: ${err}`);
  }
  if (res.status === 422) {
    const body = (await res.json()) as { error: string; field?: string };
    throw new FieldError(body.error, body.field ?? "spec");
  }
  if (!res.ok) throw new Error(`/api/predict -> ${res.status}`);
  return res.json() as Promise<PredictionResponse>;
}

/**
 * Debounced, sequence-numbered prediction requests.
 *
 * Edits within the debounce window collapse into one request, and a response
 * is applied only while its sequence number is still the newest issued, so a
 * slow stale response can never overwrite a fresher one.
 */
export class PredictionScheduler {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private issued = 0;
  requestCount = 0;

  constructor(
    private readonly send: (spec: Spec) => Promise<PredictionResponse> = postPredict,
    readonly debounceMs = 250,
  ) {}

  schedule(
    spec: Spec,
    apply: (response: PredictionResponse) => void,
    onError: (error: unknown) => void,
  ): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.fire(spec, apply, onError);
    }, this.debounceMs);
  }

  private async fire(
    spec: Spec,
    apply: (response: PredictionResponse) => void,
    onError: (error: unknown) => void,
  ): Promise<void> {
    const seq = ++this.issued;
    this.requestCount += 1;
    try {
      const response = await this.send(spec);
      if (seq === this.issued) apply(response);
    } catch (error) {
      if (seq === this.issued) onError(error);
    }
  }
}

/** Typed client for the qlst inference service HTTP API. */

export interface ModelInfo {
  id: string;
  kind: string;
  status: string;
  config: Record<string, unknown>;
}

export interface DecodeResponse {
  signal: number[];
}

export interface ClassifyResponse {
  probs: Record<string, number>;
}

export interface TraverseStep {
  query: number;
  z: number[];
  signal: number[];
  probs: Record<string, number>;
  morphology: Record<string, number | boolean | null>;
}

export interface TraverseBundle {
  class_name: string;
  origin: Record<string, unknown>;
  steps: TraverseStep[];
  [key: string]: unknown;
}

export type Origin =
  | { zero: true }
  | { z: number[] }
  | { signal: number[] };

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;

export class ServiceError extends Error {
  readonly status: number;
  constructor(status: number, message: string) {
    super(message);
    this.status = status;
  }
}

export class ServiceClient {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn =
      fetchFn ?? ((url, init) => fetch(url, init) as ReturnType<FetchLike>);
  }

  private async request<T>(path: string, body?: unknown): Promise<T> {
    const init =
      body === undefined
        ? undefined
        : {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(body),
          };
    const res = await this.fetchFn(this.baseUrl + path, init);
    const payload = (await res.json()) as Record<string, unknown>;
    if (!res.ok) {
      const detail =
        typeof payload?.detail === "string" ? payload.detail : `HTTP ${res.status}`;
      throw new ServiceError(res.status, detail);
    }
    return payload as T;
  }

  listModels(): Promise<{ models: ModelInfo[] }> {
    return this.request("/models");
  }

  decode(vaeId: string, z: number[]): Promise<DecodeResponse> {
    return this.request("/decode", { vae_id: vaeId, z });
  }

  classify(clfId: string, signal: number[]): Promise<ClassifyResponse> {
    return this.request("/classify", { clf_id: clfId, signal });
  }

  traverse(qlstId: string, origin: Origin, queries: number[]): Promise<TraverseBundle> {
    return this.request("/traverse", { qlst_id: qlstId, origin, queries });
  }
}

/**
 * Serializes calls per endpoint so that at most one request is in flight and
 * only the latest issued call's result is delivered; responses to superseded
 * calls resolve to null and are never surfaced.
 */
export class LatestWins<T> {
  private seq = 0;
  private inFlight = false;
  private pending: (() => Promise<T>) | null = null;

  get hasInFlight(): boolean {
    return this.inFlight;
  }

  async issue(run: () => Promise<T>): Promise<T | null> {
    const ticket = ++this.seq;
    if (this.inFlight) {
      // A request is already running: remember only the newest intent.
      this.pending = run;
      return null;
    }
    this.inFlight = true;
    try {
      let result = await run();
      let resultTicket = ticket;
      // Drain any calls queued while we were waiting; only the last survives.
      while (this.pending !== null) {
        const next = this.pending;
        this.pending = null;
        resultTicket = this.seq;
        result = await next();
      }
      return resultTicket === this.seq ? result : null;
    } finally {
      this.inFlight = false;
      this.pending = null;
    }
  }
}

import type {
  DecisionViewDoc,
  ErrorDoc,
  HypotheticalEvent,
  StateDoc,
  WhatIfDoc,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly code: string,
    message: string,
    public readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

// Thin fetch client for the decision service. Identical requests issued
// while one is already in flight share that request's promise, so a slow
// service never accumulates a queue of duplicate reads.
export class ServiceClient {
  private inflight = new Map<string, Promise<unknown>>();

  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  get inflightCount(): number {
    return this.inflight.size;
  }

  health(): Promise<{ status: string }> {
    return this.request("GET", "/healthz");
  }

  getState(trialId: string): Promise<StateDoc> {
    return this.request("GET", `/trials/${encodeURIComponent(trialId)}/state`);
  }

  getDecision(trialId: string, asOf?: number | null): Promise<DecisionViewDoc> {
    const query = asOf === null || asOf === undefined ? "" : `?as_of=${asOf}`;
    return this.request(
      "GET",
      `/trials/${encodeURIComponent(trialId)}/decision${query}`,
    );
  }

  whatIf(
    trialId: string,
    asOf: number | null,
    events: HypotheticalEvent[],
  ): Promise<WhatIfDoc> {
    const body: Record<string, unknown> = { events };
    if (asOf !== null && asOf !== undefined) {
      body.as_of = asOf;
    }
    return this.request(
      "POST",
      `/trials/${encodeURIComponent(trialId)}/decision:what-if`,
      body,
    );
  }

  private request<T>(
    method: string,
    path: string,
    body?: Record<string, unknown>,
  ): Promise<T> {
    const payload = body === undefined ? undefined : JSON.stringify(body);
    const key = `${method} ${path} ${payload ?? ""}`;
    const pending = this.inflight.get(key);
    if (pending !== undefined) {
      return pending as Promise<T>;
    }
    const promise = this.send<T>(method, path, payload).finally(() => {
      this.inflight.delete(key);
    });
    this.inflight.set(key, promise);
    return promise;
  }

  private async send<T>(
    method: string,
    path: string,
    payload?: string,
  ): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, {
        method,
        headers: payload === undefined ? {} : { "Content-Type": "application/json" },
        body: payload,
      });
    } catch (exc) {
      const message = exc instanceof Error ? exc.message : String(exc);
      throw new ApiError("unreachable", `service unreachable: ${message}`, 0);
    }
    if (!response.ok) {
      throw new ApiError(...(await describeFailure(response)));
    }
    return (await response.json()) as T;
  }
}

async function describeFailure(
  response: Response,
): Promise<[string, string, number]> {
  try {
    const doc = (await response.json()) as ErrorDoc;
    if (typeof doc.code === "string" && typeof doc.message === "string") {
      return [doc.code, doc.message, response.status];
    }
  } catch {
    // fall through to the generic description
  }
  return ["http_error", `request failed with status ${response.status}`, response.status];
}

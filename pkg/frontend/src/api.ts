// Typed client for the /v1 query service. All service interaction in the UI
// goes through this module; nothing else touches the network.

export interface HealthInfo {
  status: string;
  model_id: string;
  mode: string;
  cross_lingual: boolean;
  languages: string[];
  target_languages: string[];
  k: number;
}

export interface Candidate {
  surface: string;
  score: number;
  rank: number;
}

export interface QueryRequest {
  definition: string;
  definition_language: string;
  target_language: string;
  top_n: number;
}

export interface QueryResponse {
  candidates: Candidate[];
  model_id: string;
  timing_ms: number;
}

export class ServiceError extends Error {
  constructor(readonly status: number, readonly code: string, message: string) {
    super(message);
    this.name = "ServiceError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ServiceClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async health(): Promise<HealthInfo> {
    const resp = await this.fetchFn(`${this.baseUrl}/v1/health`);
    if (!resp.ok) {
      throw new ServiceError(resp.status, "health_failed", `health check failed (${resp.status})`);
    }
    return (await resp.json()) as HealthInfo;
  }

  async reverse(request: QueryRequest, signal?: AbortSignal): Promise<QueryResponse> {
    const resp = await this.fetchFn(`${this.baseUrl}/v1/reverse`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
      signal,
    });
    if (!resp.ok) {
      let code = "http_error";
      let message = `service returned ${resp.status}`;
      try {
        const body = await resp.json();
        if (body?.error) {
          code = body.error.code ?? code;
          message = body.error.message ?? message;
        }
      } catch {
        // non-JSON error body: keep the generic message
      }
      throw new ServiceError(resp.status, code, message);
    }
    return (await resp.json()) as QueryResponse;
  }
}

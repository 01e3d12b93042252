/**
 * Typed client for the housekeep service. Every view in the UI is fed from
 * these calls; nothing is computed client-side from anything else.
 */

export interface ScenarioInfo {
  id: string;
  cleanup_zone: string;
  command: string;
  objects: string[];
}

export interface SessionInfo {
  session_id: string;
  scenario: string;
  objects: string[];
  k: number;
}

export interface ExecutedMove {
  object: string;
  from: string;
  to: string;
  spoken_to: string;
}

export interface SkippedObject {
  object: string;
  destination: string;
  reason: string;
}

export interface RetrievedChunk {
  entry_id: number;
  rendered_text: string;
  score: number;
}

export interface TurnRecord {
  request: { text: string; received_at: string };
  route: { category: string; clarification_prompt: string | null; provenance: string };
  plan: { tasks: { objects: string[]; destination: string }[] } | null;
  answer: string | null;
  clarification: string | null;
  narration: string | null;
  execution: { executed: ExecutedMove[]; skipped: SkippedObject[] } | null;
  retrieval: RetrievedChunk[] | null;
  stage_latencies: Record<string, number>;
  warnings: string[];
  error: string | null;
  planner_retried: boolean;
}

export interface TurnResponse {
  turn_index: number;
  record: TurnRecord;
}

export interface WorldResponse {
  session_id: string;
  scenario: string;
  world: {
    placements: Record<string, string>;
    event_log: { timestamp: string; object: string; from: string; to: string }[];
  };
}

export interface HistoryResponse {
  session_id: string;
  turns: TurnRecord[];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly correlationId: string | null = null,
  ) {
    super(message);
    this.name = "ApiError";
  }

  /** Connection-level failures are worth a retry; protocol rejections are not. */
  get retryable(): boolean {
    return this.status === 0 || this.status >= 500;
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class Client {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    let resp: Response;
    try {
      resp = await this.fetchFn(`${this.baseUrl}${path}`, init);
    } catch (exc) {
      throw new ApiError(0, "transport", `cannot reach service: ${String(exc)}`);
    }
    if (!resp.ok) {
      let code = "unknown";
      let message = `HTTP ${resp.status}`;
      let correlationId: string | null = null;
      try {
        const body = await resp.json();
        code = body?.error?.code ?? code;
        message = body?.error?.message ?? message;
        correlationId = body?.error?.correlation_id ?? null;
      } catch {
        // non-JSON error body; keep the status-line message
      }
      throw new ApiError(resp.status, code, message, correlationId);
    }
    return resp;
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.request(path, init);
    return (await resp.json()) as T;
  }

  async scenarios(): Promise<ScenarioInfo[]> {
    const body = await this.json<{ scenarios: ScenarioInfo[] }>("/v1/scenarios");
    return body.scenarios;
  }

  createSession(scenario: string, spokenOverrides?: Record<string, string>): Promise<SessionInfo> {
    return this.json<SessionInfo>("/v1/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(
        spokenOverrides ? { scenario, spoken_overrides: spokenOverrides } : { scenario },
      ),
    });
  }

  postTurn(sessionId: string, text: string): Promise<TurnResponse> {
    return this.json<TurnResponse>(`/v1/sessions/${sessionId}/turns`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ text }),
    });
  }

  world(sessionId: string): Promise<WorldResponse> {
    return this.json<WorldResponse>(`/v1/sessions/${sessionId}/world`);
  }

  history(sessionId: string): Promise<HistoryResponse> {
    return this.json<HistoryResponse>(`/v1/sessions/${sessionId}/history`);
  }

  /** Raw SSE backlog after the given cursor; the service closes the stream. */
  async events(sessionId: string, after: number): Promise<string> {
    const resp = await this.request(`/v1/sessions/${sessionId}/events?after=${after}`, {
      headers: { "last-event-id": String(after) },
    });
    return resp.text();
  }

  async healthy(): Promise<boolean> {
    try {
      await this.request("/healthz");
      return true;
    } catch {
      return false;
    }
  }
}

// Thin client for the /v1 review service. The fetch implementation is
// injected so tests can record or fake traffic; every request in the app
// flows through this class.
import { Decision, ExportDocument, SessionPayload } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string
  ) {
    super(message);
  }
}

async function raise(resp: Response): Promise<never> {
  let code = "error";
  let message = `HTTP ${resp.status}`;
  try {
    const body = await resp.json();
    code = body.code ?? code;
    message = body.message ?? message;
  } catch {
    // non-JSON error body; keep defaults
  }
  throw new ApiError(resp.status, code, message);
}

export class ReviewApi {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const resp = await this.fetchFn(`${this.baseUrl}${path}`);
    if (!resp.ok) await raise(resp);
    return (await resp.json()) as T;
  }

  private async postJson<T>(path: string, body: unknown): Promise<T> {
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!resp.ok) await raise(resp);
    return (await resp.json()) as T;
  }

  health(): Promise<{ status: string; models: string[] }> {
    return this.getJson("/v1/health");
  }

  techniques(): Promise<{ techniques: { id: string; name: string; tactics: string[] }[] }> {
    return this.getJson("/v1/techniques");
  }

  createSession(text: string, modelId: string, k = 5, theta = 0.2): Promise<SessionPayload> {
    return this.postJson("/v1/sessions", { text, model_id: modelId, k, theta });
  }

  loadSession(sessionId: string): Promise<SessionPayload> {
    return this.getJson(`/v1/sessions/${sessionId}`);
  }

  recordDecision(
    sessionId: string,
    sentenceIndex: number,
    technique: string,
    decision: Decision
  ): Promise<SessionPayload> {
    return this.postJson(`/v1/sessions/${sessionId}/decisions`, {
      sentence_index: sentenceIndex,
      technique,
      decision,
    });
  }

  /** Raw export body; callers compare or download these bytes verbatim. */
  async exportSession(sessionId: string): Promise<{ raw: string; doc: ExportDocument }> {
    const resp = await this.fetchFn(`${this.baseUrl}/v1/sessions/${sessionId}/export`);
    if (!resp.ok) await raise(resp);
    const raw = await resp.text();
    return { raw, doc: JSON.parse(raw) as ExportDocument };
  }
}

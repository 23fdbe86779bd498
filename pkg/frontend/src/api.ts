/**
 * Thin client over the assessment service. All state lives server-side;
 * the client is a typed fetch wrapper with injectable transport for tests.
 */

import type {
  Assessment,
  Questionnaire,
  ResponseDocument,
  ServiceError,
} from "./types";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  code: string;
  status: number;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.code = code;
    this.status = status;
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let code = "unknown";
  let message = `request failed with status ${response.status}`;
  try {
    const body = (await response.json()) as ServiceError;
    if (body && body.error) {
      code = body.error.code;
      message = body.error.message;
    }
  } catch {
    // non-JSON error body; keep defaults
  }
  return new ApiError(response.status, code, message);
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async get<T>(path: string): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`);
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  private async send<T>(method: string, path: string, body: unknown): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  getQuestionnaire(description?: string): Promise<Questionnaire> {
    const query = description ? `?description=${encodeURIComponent(description)}` : "";
    return this.get<Questionnaire>(`/questionnaire${query}`);
  }

  createAssessment(document: ResponseDocument & { created_at?: string }): Promise<Assessment> {
    return this.send<Assessment>("POST", "/assessments", document);
  }

  getAssessment(assessmentId: string): Promise<Assessment> {
    return this.get<Assessment>(`/assessments/${assessmentId}`);
  }

  whatIf(assessmentId: string, retrainRate: number): Promise<Assessment> {
    return this.send<Assessment>("POST", `/assessments/${assessmentId}/whatif`, {
      retrain_rate: retrainRate,
    });
  }

  createSession(): Promise<{ session_id: string }> {
    return this.send<{ session_id: string }>("POST", "/sessions", {});
  }

  saveSessionDraft(sessionId: string, draft: {
    draft_responses: Record<string, string>;
    system_description?: string;
    threat_actor?: string;
  }): Promise<unknown> {
    return this.send("PUT", `/sessions/${sessionId}`, draft);
  }
}

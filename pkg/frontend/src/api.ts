import type { ModelInfo, SessionPayload, SessionSnapshot } from './types';

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = 'ApiError';
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin typed client for the survey session endpoints. */
export class SurveyApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new ApiError(0, `service unreachable: ${String(err)}`);
    }
    const body = await response.text();
    if (!response.ok) {
      let detail = body;
      try {
        detail = JSON.parse(body).detail ?? body;
      } catch {
        // non-JSON error body: keep the raw text
      }
      throw new ApiError(response.status, String(detail));
    }
    return JSON.parse(body) as T;
  }

  listModels(): Promise<ModelInfo[]> {
    return this.request<ModelInfo[]>('/v1/models');
  }

  createSession(
    modelId: string,
    prefilled: Record<string, number>,
    lambda = 0,
  ): Promise<SessionPayload> {
    return this.request<SessionPayload>('/v1/sessions', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ model_id: modelId, lambda, prefilled }),
    });
  }

  submitAnswer(sessionId: string, featureId: number, value: number): Promise<SessionPayload> {
    return this.request<SessionPayload>(`/v1/sessions/${sessionId}/answers`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ feature_id: featureId, value }),
    });
  }

  skipAnswer(sessionId: string, featureId: number): Promise<SessionPayload> {
    return this.request<SessionPayload>(`/v1/sessions/${sessionId}/answers`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ feature_id: featureId, dont_know: true }),
    });
  }

  getSession(sessionId: string): Promise<SessionSnapshot> {
    return this.request<SessionSnapshot>(`/v1/sessions/${sessionId}`);
  }
}

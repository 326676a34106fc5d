import type { ModelInfo, SessionPayload, SessionSnapshot } from '../src/types';

export const MODELS: ModelInfo[] = [
  {
    id: 'energy',
    name: 'energy',
    target: 'kwh',
    feature_count: 4,
    free_features: ['bedrooms'],
    alpha: 0.1,
  },
];

export function payloadFixture(overrides: Partial<SessionPayload> = {}): SessionPayload {
  return {
    session_id: 'fixture-session',
    model_id: 'energy',
    complete: false,
    prediction: { point: 412.25, lower: 390.5, upper: 434.0, width: 43.5, alpha: 0.1 },
    question: {
      id: 3,
      name: 'window_glass',
      prompt: 'What type of glass do the windows have?',
      kind: 'discrete',
      range: [1, 2, 3],
      cost: 5,
      cost_tier: 'high',
    },
    answered: 1,
    skipped: 0,
    questions_total: 3,
    questions_remaining: 2,
    cost_spent: 1,
    flags: [],
    ...overrides,
  };
}

export function snapshotFixture(): SessionSnapshot {
  const payload = payloadFixture({ complete: true, question: null, answered: 3, cost_spent: 7 });
  return {
    ...payload,
    lambda: 0,
    alpha: 0.1,
    ordering: [2, 4, 3],
    unavailable: [],
    predictions: [payload.prediction],
    trajectory: [
      { step: 0, asked_feature: null, width: 61.0, point: 400.0, cum_cost: 0 },
      { step: 1, asked_feature: 2, width: 55.25, point: 405.5, cum_cost: 1 },
      { step: 2, asked_feature: 4, width: 48.0, point: 410.0, cum_cost: 2 },
      { step: 3, asked_feature: 3, width: 43.5, point: 412.25, cum_cost: 7 },
    ],
  };
}

type Responder = (path: string, init?: RequestInit) => { status: number; body: unknown };

/** Minimal fetch stub: route -> canned response. */
export function fakeFetch(responder: Responder) {
  return async (input: string, init?: RequestInit): Promise<Response> => {
    const url = new URL(input);
    const { status, body } = responder(url.pathname, init);
    return new Response(JSON.stringify(body), {
      status,
      headers: { 'content-type': 'application/json' },
    });
  };
}

import { ApiError, SurveyApi } from './api';
import type { HistoryEntry, ModelInfo, SessionPayload, SessionSnapshot } from './types';

export type Screen = 'start' | 'question' | 'summary' | 'error';

export interface FlowState {
  screen: Screen;
  models: ModelInfo[];
  payload: SessionPayload | null;
  widthHistory: number[];
  history: HistoryEntry[];
  snapshot: SessionSnapshot | null;
  busy: boolean;
  error: string | null;
  validation: string | null;
}

/** Single-session store. All survey math lives server-side; this only tracks
 * the latest server payload plus display history. State changes go through
 * the listed actions; subscribers re-render from the full state. */
export class SessionFlow {
  private state: FlowState = {
    screen: 'start',
    models: [],
    payload: null,
    widthHistory: [],
    history: [],
    snapshot: null,
    busy: false,
    error: null,
    validation: null,
  };
  private listeners: Array<() => void> = [];
  private pendingOps = 0;
  private idleResolvers: Array<() => void> = [];

  constructor(private readonly api: SurveyApi) {}

  get(): FlowState {
    return this.state;
  }

  subscribe(listener: () => void): void {
    this.listeners.push(listener);
  }

  /** Resolves once no request is in flight (e2e synchronization point). */
  idle(): Promise<void> {
    if (this.pendingOps === 0) return Promise.resolve();
    return new Promise((resolve) => this.idleResolvers.push(resolve));
  }

  private set(patch: Partial<FlowState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener();
  }

  private async run(op: () => Promise<void>): Promise<void> {
    this.pendingOps += 1;
    this.set({ busy: true, validation: null });
    try {
      await op();
    } catch (err) {
      const detail = err instanceof ApiError ? err.message : String(err);
      if (err instanceof ApiError && err.status === 400) {
        this.set({ validation: detail }); // bad value: stay on the question
      } else {
        this.set({ screen: 'error', error: detail });
      }
    } finally {
      this.pendingOps -= 1;
      this.set({ busy: this.pendingOps > 0 });
      if (this.pendingOps === 0) {
        for (const resolve of this.idleResolvers.splice(0)) resolve();
      }
    }
  }

  loadModels(): Promise<void> {
    return this.run(async () => {
      const models = await this.api.listModels();
      this.set({ models, screen: 'start', error: null });
    });
  }

  start(modelId: string, prefilled: Record<string, number>): Promise<void> {
    return this.run(async () => {
      const payload = await this.api.createSession(modelId, prefilled);
      // No phantom session: state only changes after the server confirms.
      this.set({
        payload,
        widthHistory: [payload.prediction.width],
        history: [],
        snapshot: null,
        screen: payload.complete ? 'summary' : 'question',
        error: null,
      });
      if (payload.complete) await this.loadSnapshot();
    });
  }

  answer(value: number): Promise<void> {
    return this.submit(value);
  }

  skip(): Promise<void> {
    return this.submit('dont_know');
  }

  private submit(value: number | 'dont_know'): Promise<void> {
    return this.run(async () => {
      const current = this.state.payload;
      if (!current || !current.question) return;
      const question = current.question;
      const payload =
        value === 'dont_know'
          ? await this.api.skipAnswer(current.session_id, question.id)
          : await this.api.submitAnswer(current.session_id, question.id, value);
      this.set({
        payload,
        widthHistory: [...this.state.widthHistory, payload.prediction.width],
        history: [
          ...this.state.history,
          { question, answer: value, prediction: payload.prediction, costAfter: payload.cost_spent },
        ],
        screen: payload.complete ? 'summary' : 'question',
      });
      if (payload.complete) await this.loadSnapshot();
    });
  }

  /** Stop early and show the summary for what has been answered so far. */
  stop(): Promise<void> {
    return this.run(async () => {
      await this.loadSnapshot();
      this.set({ screen: 'summary' });
    });
  }

  retry(): Promise<void> {
    this.set({ error: null });
    return this.state.payload ? Promise.resolve(this.set({ screen: 'question' })) : this.loadModels();
  }

  /** Client-side validation failure: message shown without a server call. */
  flagValidation(message: string): void {
    this.set({ validation: message });
  }

  private async loadSnapshot(): Promise<void> {
    const payload = this.state.payload;
    if (!payload) return;
    const snapshot = await this.api.getSession(payload.session_id);
    this.set({ snapshot });
  }
}

/** Downloadable session record in the harness trajectory layout. The truth
 * is unknown client-side, so the point prediction stands in the error slot's
 * place (column named "point"). */
export function trajectoryCsv(snapshot: SessionSnapshot): string {
  const lines = ['row_id,orderer,lambda,step,asked_feature,width,point,cum_cost'];
  for (const row of snapshot.trajectory) {
    lines.push(
      [
        snapshot.session_id,
        'dqo',
        String(snapshot.lambda),
        String(row.step),
        row.asked_feature === null ? '' : String(row.asked_feature),
        String(row.width),
        String(row.point),
        String(row.cum_cost),
      ].join(','),
    );
  }
  return lines.join('\n') + '\n';
}

// Wire types mirroring the survey service JSON schema. The UI renders these
// fields verbatim; it never derives its own prediction math.

export interface PredictionView {
  point: number;
  lower: number;
  upper: number;
  width: number;
  alpha: number;
}

export interface QuestionView {
  id: number;
  name: string;
  prompt: string;
  kind: 'continuous' | 'discrete';
  range: number[];
  cost: number;
  cost_tier: 'free' | 'low' | 'high';
}

export interface SessionPayload {
  session_id: string;
  model_id: string;
  complete: boolean;
  prediction: PredictionView;
  question: QuestionView | null;
  answered: number;
  skipped: number;
  questions_total: number;
  questions_remaining: number;
  cost_spent: number;
  flags: string[];
}

export interface TrajectoryRow {
  step: number;
  asked_feature: number | null;
  width: number;
  point: number;
  cum_cost: number;
}

export interface SessionSnapshot extends SessionPayload {
  lambda: number;
  alpha: number;
  ordering: number[];
  unavailable: number[];
  predictions: PredictionView[];
  trajectory: TrajectoryRow[];
}

export interface ModelInfo {
  id: string;
  name: string;
  target: string;
  feature_count: number;
  free_features: string[];
  alpha: number;
}

export interface HistoryEntry {
  question: QuestionView;
  answer: number | 'dont_know';
  prediction: PredictionView;
  costAfter: number;
}

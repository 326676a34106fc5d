import { SurveyApi } from './api';
import { SessionFlow } from './state';
import { render } from './views';

export interface BootOptions {
  apiBase?: string;
  fetchFn?: (input: string, init?: RequestInit) => Promise<Response>;
}

/** Mount the survey client into #app and load the model list. */
export function boot(doc: Document, options: BootOptions = {}): SessionFlow {
  const root = doc.getElementById('app');
  if (!root) throw new Error('missing #app mount point');
  const params = new URLSearchParams(doc.defaultView?.location.search ?? '');
  const apiBase = options.apiBase ?? params.get('api') ?? 'http://127.0.0.1:8000';
  const flow = new SessionFlow(new SurveyApi(apiBase, options.fetchFn));
  flow.subscribe(() => render(root, flow));
  render(root, flow);
  void flow.loadModels();
  return flow;
}

declare global {
  interface Window {
    __dqoBootSkip?: boolean;
  }
}

if (typeof window !== 'undefined' && typeof document !== 'undefined' && !window.__dqoBootSkip) {
  if (document.readyState === 'loading') {
    document.addEventListener('DOMContentLoaded', () => boot(document));
  } else if (document.getElementById('app')) {
    boot(document);
  }
}

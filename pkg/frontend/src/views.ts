import { answeredPercent, fmt, fmtCost, tierLabel } from './format';
import { SessionFlow, trajectoryCsv, type FlowState } from './state';
import { intervalBand, widthSparkline } from './sparkline';
import type { HistoryEntry, ModelInfo, PredictionView, QuestionView } from './types';

function esc(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function confidenceLabel(pred: PredictionView): string {
  return `${fmt((1 - pred.alpha) * 100)}% interval`;
}

function predictionCard(state: FlowState): string {
  const payload = state.payload;
  if (!payload) return '';
  const pred = payload.prediction;
  const maxWidth = Math.max(...state.widthHistory, pred.width);
  return `
    <section class="card prediction" aria-label="current prediction">
      <h2>Current estimate</h2>
      <p class="point" data-field="point">${fmt(pred.point)}</p>
      <p class="range">
        <span data-field="lower">${fmt(pred.lower)}</span>
        &ndash;
        <span data-field="upper">${fmt(pred.upper)}</span>
        <span class="conf">(${confidenceLabel(pred)})</span>
      </p>
      ${intervalBand(pred.width, maxWidth)}
      <p class="width">width <span data-field="width">${fmt(pred.width)}</span></p>
      ${widthSparkline(state.widthHistory)}
    </section>`;
}

function progressBlock(state: FlowState): string {
  const payload = state.payload;
  if (!payload) return '';
  const total = payload.questions_total;
  const done = payload.answered + payload.skipped;
  const pct = total > 0 ? Math.floor((done / total) * 100) : 100;
  const costPct = Math.min(100, (payload.cost_spent / (payload.cost_spent + 20)) * 100);
  return `
    <section class="card progress" aria-label="progress">
      <p><span data-field="answered">${payload.answered}</span> answered,
         <span data-field="skipped">${payload.skipped}</span> skipped
         of <span data-field="questions_total">${total}</span></p>
      <div class="bar" role="progressbar" aria-valuemin="0" aria-valuemax="${total}"
           aria-valuenow="${done}"><div style="width:${pct}%"></div></div>
      <p>cost spent <span class="cost" data-field="cost_spent">${fmtCost(payload.cost_spent)}</span></p>
      <div class="bar cost-meter"><div style="width:${costPct.toFixed(1)}%"></div></div>
    </section>`;
}

function questionInput(question: QuestionView): string {
  if (question.kind === 'discrete' && question.range.length > 0 && question.range.length <= 12) {
    const options = question.range
      .map((v: number) => `<option value="${fmt(v)}">${fmt(v)}</option>`)
      .join('');
    return `<select id="answer-input" name="answer">${options}</select>`;
  }
  return `<input id="answer-input" name="answer" type="number" step="any" autocomplete="off">`;
}

function questionCard(state: FlowState): string {
  const question = state.payload?.question;
  if (!question) return '';
  const validation = state.validation
    ? `<p class="validation" role="alert">${esc(state.validation)}</p>`
    : '';
  return `
    <section class="card question" aria-label="current question">
      <span class="badge tier-${question.cost_tier}">${tierLabel(question.cost_tier)}
        (cost <span data-field="question_cost">${fmtCost(question.cost)}</span>)</span>
      <label for="answer-input">${esc(question.prompt)}</label>
      ${questionInput(question)}
      ${validation}
      <div class="actions">
        <button id="answer-btn" ${state.busy ? 'disabled' : ''}>Answer</button>
        <button id="skip-btn" ${state.busy ? 'disabled' : ''}>Don't know</button>
        <button id="stop-btn" ${state.busy ? 'disabled' : ''}>Stop &amp; summarize</button>
      </div>
    </section>`;
}

function historyList(state: FlowState): string {
  if (!state.history.length) return '';
  const rows = state.history
    .map(
      (h: HistoryEntry) => `
      <li>
        <span class="q">${esc(h.question.name)}</span>
        <span class="a">${h.answer === 'dont_know' ? "don't know" : fmt(h.answer)}</span>
        <span class="w">width ${fmt(h.prediction.width)}</span>
      </li>`,
    )
    .join('');
  return `<section class="card history" aria-label="answer history"><h2>History</h2><ol>${rows}</ol></section>`;
}

function startScreen(state: FlowState): string {
  if (!state.models.length) {
    return `<section class="card"><p>Loading models&hellip;</p></section>`;
  }
  const options = state.models
    .map((m: ModelInfo) => `<option value="${esc(m.id)}">${esc(m.name)} (${m.feature_count} questions)</option>`)
    .join('');
  const first = state.models[0];
  const prefill = first.free_features
    .map(
      (name: string) => `
      <div class="prefill-row">
        <label for="prefill-${esc(name)}">${esc(name)}</label>
        <input id="prefill-${esc(name)}" data-prefill="${esc(name)}" type="number" step="any">
      </div>`,
    )
    .join('');
  return `
    <section class="card start" aria-label="start survey">
      <h2>Start a survey</h2>
      <label for="model-select">Model</label>
      <select id="model-select">${options}</select>
      <fieldset><legend>Known upfront (optional)</legend>${prefill}</fieldset>
      <button id="start-btn" ${state.busy ? 'disabled' : ''}>Start</button>
    </section>`;
}

function summaryScreen(state: FlowState): string {
  const payload = state.payload;
  if (!payload) return '';
  const pred = payload.prediction;
  const total = payload.questions_total;
  const completeBadge =
    payload.answered + payload.skipped >= total && total > 0 && payload.skipped === 0
      ? `<span class="badge done">answered 100%</span>`
      : '';
  return `
    <section class="card summary" aria-label="session summary">
      <h2>Summary</h2>
      ${completeBadge}
      <p class="point">final estimate <span data-field="point">${fmt(pred.point)}</span></p>
      <p class="range"><span data-field="lower">${fmt(pred.lower)}</span> &ndash;
         <span data-field="upper">${fmt(pred.upper)}</span>
         <span class="conf">(${confidenceLabel(pred)})</span></p>
      <p>width <span data-field="width">${fmt(pred.width)}</span></p>
      <p>answered <span data-field="answered">${payload.answered}</span>
         of <span data-field="questions_total">${total}</span>
         (<span class="fraction">${answeredPercent(payload.answered, total)}</span>),
         skipped <span data-field="skipped">${payload.skipped}</span></p>
      <p>cost spent <span data-field="cost_spent">${fmtCost(payload.cost_spent)}</span></p>
      ${widthSparkline(state.widthHistory)}
      <button id="download-btn" ${state.snapshot ? '' : 'disabled'}>Download trajectory</button>
    </section>`;
}

function errorScreen(state: FlowState): string {
  return `
    <section class="card error" role="alert">
      <h2>Something went wrong</h2>
      <p>${esc(state.error ?? 'unknown error')}</p>
      <button id="retry-btn">Retry</button>
    </section>`;
}

function readAnswer(root: HTMLElement, question: QuestionView): number | string {
  const input = root.querySelector<HTMLInputElement | HTMLSelectElement>('#answer-input');
  if (!input || input.value.trim() === '') return 'enter a value first';
  const value = Number(input.value);
  if (!Number.isFinite(value)) return 'enter a numeric value';
  if (question.kind === 'discrete' && question.range.length && !question.range.includes(value)) {
    return `value must be one of ${question.range.map(fmt).join(', ')}`;
  }
  return value;
}

function wire(root: HTMLElement, flow: SessionFlow): void {
  const state = flow.get();
  root.querySelector('#start-btn')?.addEventListener('click', () => {
    const select = root.querySelector<HTMLSelectElement>('#model-select');
    if (!select) return;
    const prefilled: Record<string, number> = {};
    for (const input of root.querySelectorAll<HTMLInputElement>('[data-prefill]')) {
      if (input.value.trim() !== '') prefilled[input.dataset.prefill!] = Number(input.value);
    }
    void flow.start(select.value, prefilled);
  });
  root.querySelector('#answer-btn')?.addEventListener('click', () => {
    const question = state.payload?.question;
    if (!question) return;
    const parsed = readAnswer(root, question);
    if (typeof parsed === 'string') {
      flow.flagValidation(parsed);
      return;
    }
    void flow.answer(parsed);
  });
  root.querySelector('#skip-btn')?.addEventListener('click', () => void flow.skip());
  root.querySelector('#stop-btn')?.addEventListener('click', () => void flow.stop());
  root.querySelector('#retry-btn')?.addEventListener('click', () => void flow.retry());
  root.querySelector('#download-btn')?.addEventListener('click', () => {
    const snapshot = flow.get().snapshot;
    if (!snapshot) return;
    downloadCsv(root.ownerDocument, trajectoryCsv(snapshot), `session-${snapshot.session_id}.csv`);
  });
}

function downloadCsv(doc: Document, content: string, filename: string): void {
  const anchor = doc.createElement('a');
  anchor.href = `data:text/csv;charset=utf-8,${encodeURIComponent(content)}`;
  anchor.download = filename;
  doc.body.appendChild(anchor);
  anchor.click();
  anchor.remove();
}

export function render(root: HTMLElement, flow: SessionFlow): void {
  const state = flow.get();
  let body: string;
  switch (state.screen) {
    case 'start':
      body = startScreen(state);
      break;
    case 'question':
      body = progressBlock(state) + predictionCard(state) + questionCard(state) + historyList(state);
      break;
    case 'summary':
      body = summaryScreen(state) + historyList(state);
      break;
    case 'error':
      body = errorScreen(state);
      break;
  }
  root.innerHTML = `<main class="app">${body}</main>`;
  wire(root, flow);
}

/** End-to-end: a scripted respondent session against the real HTTP service.
 *
 * Spawns the Python service on a fixture bundle, drives the UI through the
 * DOM (10 answers + 2 don't-knows), and checks after every step that the
 * numbers on screen equal the API snapshot. Requires python3 with the dqo
 * package installed; skips otherwise.
 */

import { execFileSync, spawn, type ChildProcess } from 'node:child_process';
import { mkdtempSync, readFileSync } from 'node:fs';
import { get } from 'node:http';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { fmt } from '../src/format';
import type { SessionFlow } from '../src/state';
import type { SessionSnapshot } from '../src/types';

const PYTHON = process.env.PYTHON ?? 'python3';
const PORT = 8931;
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess | null = null;
let row: { prefilled: Record<string, number>; answers: Record<string, number> };
let available = true;

function probe(url: string): Promise<boolean> {
  return new Promise((resolve) => {
    const req = get(url, (res) => {
      res.resume();
      resolve(res.statusCode === 200);
    });
    req.on('error', () => resolve(false));
  });
}

async function waitForServer(timeoutMs = 30_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (await probe(`${BASE}/v1/models`)) return;
    await new Promise((r) => setTimeout(r, 200));
  }
  throw new Error('service did not come up');
}

beforeAll(async () => {
  try {
    execFileSync(PYTHON, ['-c', 'import dqo'], { stdio: 'ignore' });
  } catch {
    available = false;
    return;
  }
  const dir = mkdtempSync(join(tmpdir(), 'dqo-e2e-'));
  execFileSync(PYTHON, [join(__dirname, 'fixtures', 'make_fixture.py'), '--out-dir', dir], {
    stdio: 'inherit',
  });
  row = JSON.parse(readFileSync(join(dir, 'row.json'), 'utf-8'));
  server = spawn(
    PYTHON,
    ['-m', 'dqo.cli', 'serve', '--model', join(dir, 'bundle.json'), '--port', String(PORT)],
    { stdio: 'ignore' },
  );
  await waitForServer();
});

afterAll(() => {
  server?.kill();
});

function displayed(root: HTMLElement, field: string): string {
  const el = root.querySelector(`[data-field="${field}"]`);
  if (!el) throw new Error(`missing data-field ${field}`);
  return el.textContent ?? '';
}

async function fetchSnapshot(sessionId: string): Promise<SessionSnapshot> {
  const res = await fetch(`${BASE}/v1/sessions/${sessionId}`);
  expect(res.ok).toBe(true);
  return (await res.json()) as SessionSnapshot;
}

function expectScreenMatchesSnapshot(root: HTMLElement, snapshot: SessionSnapshot): void {
  expect(displayed(root, 'point')).toBe(fmt(snapshot.prediction.point));
  expect(displayed(root, 'lower')).toBe(fmt(snapshot.prediction.lower));
  expect(displayed(root, 'upper')).toBe(fmt(snapshot.prediction.upper));
  expect(displayed(root, 'width')).toBe(fmt(snapshot.prediction.width));
  expect(displayed(root, 'cost_spent')).toBe(fmt(snapshot.cost_spent));
}

describe('scripted respondent session', () => {
  it('displays API-snapshot values at every step and a correct summary', async () => {
    if (!available) {
      console.warn('python3/dqo unavailable; skipping e2e');
      return;
    }
    (globalThis as unknown as { window: { __dqoBootSkip?: boolean } }).window.__dqoBootSkip = true;
    const { boot } = await import('../src/main');

    const root = document.createElement('div');
    root.id = 'app';
    document.body.replaceChildren(root);
    const flow: SessionFlow = boot(document, {
      apiBase: BASE,
      fetchFn: (input, init) => fetch(input, init),
    });
    await flow.idle();
    expect(flow.get().models.map((m) => m.id)).toContain('bundle');

    // Fill the free features we already know and start.
    for (const input of root.querySelectorAll<HTMLInputElement>('[data-prefill]')) {
      input.value = String(row.prefilled[input.dataset.prefill!]);
    }
    root.querySelector<HTMLButtonElement>('#start-btn')!.click();
    await flow.idle();
    expect(flow.get().screen).toBe('question');
    expect(flow.get().payload!.questions_total).toBe(12);

    const sessionId = flow.get().payload!.session_id;
    expectScreenMatchesSnapshot(root, await fetchSnapshot(sessionId));

    const skipAt = new Set([2, 7]); // 2 don't-knows among the 12 interactions
    let answered = 0;
    let skipped = 0;
    for (let step = 0; step < 12; step++) {
      const payload = flow.get().payload!;
      expect(payload.complete).toBe(false);
      const question = payload.question!;
      if (skipAt.has(step)) {
        root.querySelector<HTMLButtonElement>('#skip-btn')!.click();
        skipped += 1;
      } else {
        const input = root.querySelector<HTMLInputElement | HTMLSelectElement>('#answer-input')!;
        input.value = fmt(row.answers[String(question.id)]);
        root.querySelector<HTMLButtonElement>('#answer-btn')!.click();
        answered += 1;
      }
      await flow.idle();
      expectScreenMatchesSnapshot(root, await fetchSnapshot(sessionId));
    }

    expect(answered).toBe(10);
    expect(skipped).toBe(2);
    const summary = flow.get();
    expect(summary.screen).toBe('summary');
    expect(summary.payload!.complete).toBe(true);

    const snapshot = await fetchSnapshot(sessionId);
    expect(snapshot.answered).toBe(10);
    expect(snapshot.trajectory).toHaveLength(13); // step 0 + 12 interactions
    expectScreenMatchesSnapshot(root, snapshot);
    // Summary fraction = answered / askable questions.
    expect(root.querySelector('.fraction')!.textContent).toBe('83%');
    // Skipped questions charged nothing: cost equals the sum of answered costs.
    expect(snapshot.cost_spent).toBe(
      snapshot.trajectory[snapshot.trajectory.length - 1].cum_cost,
    );
  });
});

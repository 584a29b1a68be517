// @vitest-environment jsdom
//
// End-to-end: boot the real Python service on a quickly-trained model, mount
// the UI in jsdom, and click through generate -> highlight -> save -> rate ->
// comment against the live server.

import { execFile, spawn, type ChildProcess } from 'node:child_process';
import { mkdtempSync, readFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join, resolve } from 'node:path';
import { promisify } from 'node:util';

import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { initApp, type App } from '../src/main.js';

const run = promisify(execFile);
const ROOT = resolve(__dirname, '..', '..');
const PORT = 8098 + Math.floor(Math.random() * 400);
const BASE = `http://127.0.0.1:${PORT}`;
const KEY = 'e2e-test-key';

let server: ChildProcess | null = null;

async function until(check: () => boolean | Promise<boolean>, ms: number, what: string) {
  const deadline = Date.now() + ms;
  while (Date.now() < deadline) {
    if (await check()) return;
    await new Promise((r) => setTimeout(r, 80));
  }
  throw new Error(`timed out waiting for ${what}`);
}

beforeAll(async () => {
  const work = mkdtempSync(join(tmpdir(), 'recipelab-e2e-'));
  const cli = (...args: string[]) =>
    run('python3', ['-m', 'recipelab.cli', ...args], { cwd: ROOT });

  await cli('prepare', '--out', work);
  await cli('train-bpe', '--corpus', join(work, 'records.jsonl'),
            '--merges', '512', '--out', join(work, 'vocab.txt'));
  await cli('train',
            '--corpus', join(work, 'records.jsonl'),
            '--split', join(work, 'split.json'),
            '--vocab', join(work, 'vocab.txt'),
            '--out', join(work, 'model.npz'),
            '--steps', '60', '--layers', '1', '--heads', '2',
            '--embed-dim', '32', '--context-len', '512');

  server = spawn('python3', [
    '-m', 'recipelab.cli', 'serve',
    '--corpus', join(work, 'records.jsonl'),
    '--vocab', join(work, 'vocab.txt'),
    '--checkpoint', join(work, 'model.npz'),
    '--store', join(work, 'generations.log'),
    '--bind', `127.0.0.1:${PORT}`,
  ], { cwd: ROOT, env: { ...process.env, RECIPELAB_API_KEY: KEY } });

  await until(async () => {
    try {
      const res = await fetch(`${BASE}/v1/health`);
      return res.ok && (await res.json()).model_loaded === true;
    } catch {
      return false;
    }
  }, 30_000, 'service health');
}, 180_000);

afterAll(() => {
  server?.kill('SIGTERM');
});

function mountApp(): App {
  const html = readFileSync(resolve(__dirname, '..', 'index.html'), 'utf-8');
  const body = html.slice(html.indexOf('<body>') + 6, html.indexOf('</body>'));
  document.body.innerHTML = body;
  return initApp(document, { baseUrl: BASE, apiKey: KEY });
}

describe('live round trip', () => {
  it('generates, highlights, saves, rates, and comments', async () => {
    const app = mountApp();

    (document.getElementById('title-input') as HTMLInputElement).value = 'Hearty Tomato Soup';
    (document.getElementById('ingredients-input') as HTMLTextAreaElement).value =
      '2 cups chopped tomatoes\n1 onion, chopped\n4 cups chicken broth';
    (document.getElementById('seed-input') as HTMLInputElement).value = '123';

    const form = document.getElementById('generate-form') as HTMLFormElement;
    form.dispatchEvent(new window.Event('submit', { bubbles: true, cancelable: true }));

    const outputPanel = document.getElementById('output-panel') as HTMLElement;
    await until(() => !outputPanel.hidden, 60_000, 'generation response');

    // rendering fidelity: stripping the markup reproduces the output exactly
    const response = app.state.lastResponse!;
    expect(response.output.length).toBeGreaterThan(0);
    const outputText = document.getElementById('output-text') as HTMLElement;
    expect(outputText.textContent).toBe(response.output);
    const contextEcho = document.getElementById('context-echo') as HTMLElement;
    expect(contextEcho.textContent).toBe(
      '2 cups chopped tomatoes\n1 onion, chopped\n4 cups chicken broth',
    );
    for (const mark of Array.from(outputText.querySelectorAll('mark'))) {
      expect(mark.dataset.rootNoun).toBeTruthy();
    }

    // the form still holds the user's context for iterate-and-regenerate
    expect((document.getElementById('title-input') as HTMLInputElement).value)
      .toBe('Hearty Tomato Soup');

    // save
    (document.getElementById('save-button') as HTMLButtonElement).click();
    const savedList = document.getElementById('saved-list') as HTMLElement;
    await until(() => savedList.querySelectorAll('.saved-card').length > 0, 20_000, 'saved card');
    const card = savedList.querySelector('.saved-card') as HTMLElement;
    const generationId = Number(card.dataset.generationId);
    expect(generationId).toBeGreaterThan(0);

    // rate four stars through the widget
    const stars = card.querySelectorAll<HTMLButtonElement>('.star');
    expect(stars).toHaveLength(5);
    stars[3]!.click();
    await until(async () => {
      const res = await fetch(`${BASE}/v1/generations/${generationId}`,
                              { headers: { 'x-api-key': KEY } });
      const body = await res.json();
      return body.ratings.length === 1 && body.ratings[0].value === 4;
    }, 20_000, 'rating persisted');

    // comment through the widget
    const refreshedCard = savedList.querySelector('.saved-card') as HTMLElement;
    const commentInput = refreshedCard.querySelector('.comment-input') as HTMLInputElement;
    const commentButton = refreshedCard.querySelector('.comment-submit') as HTMLButtonElement;
    expect(commentButton.disabled).toBe(true); // empty comment cannot submit
    commentInput.value = 'e2e says hi';
    commentInput.dispatchEvent(new window.Event('input', { bubbles: true }));
    expect(commentButton.disabled).toBe(false);
    commentButton.click();
    await until(async () => {
      const res = await fetch(`${BASE}/v1/generations/${generationId}`,
                              { headers: { 'x-api-key': KEY } });
      return (await res.json()).comments.some((c: { text: string }) => c.text === 'e2e says hi');
    }, 20_000, 'comment persisted');

    // deterministic regeneration with the same seed
    form.dispatchEvent(new window.Event('submit', { bubbles: true, cancelable: true }));
    await until(() => !app.state.pending, 60_000, 'second generation');
    expect(app.state.lastResponse!.output).toBe(response.output);
  }, 180_000);

  it('switching mode swaps the editable context field', () => {
    mountApp();
    const ingredientsField = document.getElementById('ingredients-field') as HTMLElement;
    const instructionsField = document.getElementById('instructions-field') as HTMLElement;
    expect(ingredientsField.hidden).toBe(false);
    expect(instructionsField.hidden).toBe(true);

    const radio = document.querySelector<HTMLInputElement>('input[name="mode"][value="ingredients"]')!;
    radio.checked = true;
    radio.dispatchEvent(new window.Event('change', { bubbles: true }));
    expect(ingredientsField.hidden).toBe(true);
    expect(instructionsField.hidden).toBe(false);
  });

  it('client-side validation blocks bad submissions', async () => {
    const app = mountApp();
    (document.getElementById('title-input') as HTMLInputElement).value = '';
    const form = document.getElementById('generate-form') as HTMLFormElement;
    form.dispatchEvent(new window.Event('submit', { bubbles: true, cancelable: true }));
    const error = document.getElementById('form-error') as HTMLElement;
    expect(error.hidden).toBe(false);
    expect(error.textContent).toContain('title');
    expect(app.state.lastResponse).toBeNull();
  });
});

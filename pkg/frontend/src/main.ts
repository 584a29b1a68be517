/** Application wiring: form -> generate -> side-by-side panels ->
 * save / rate / comment -> saved browser.
 *
 * One generate request is in flight at a time; controls disable while
 * pending. Ratings and comments update optimistically and roll back if the
 * server rejects the write. The response never mutates the form, so
 * iterate-and-regenerate keeps the user's inputs.
 */

import { ApiError, RecipeLabClient, type ClientConfig } from './api.js';
import { segmentText, spansForField } from './highlight.js';
import {
  renderReference,
  renderReport,
  renderRuns,
  renderSavedList,
  el,
} from './render.js';
import {
  buildGenerateRequest,
  editableContextField,
  initialState,
  ingredientLines,
  isValidComment,
  isValidRating,
  K_CHOICES,
  switchMode,
  validateForm,
  type SessionState,
} from './state.js';

declare global {
  interface Window {
    RECIPELAB_CONFIG?: ClientConfig;
  }
}

interface Elements {
  form: HTMLFormElement;
  modeInputs: HTMLInputElement[];
  title: HTMLInputElement;
  ingredients: HTMLTextAreaElement;
  instructions: HTMLTextAreaElement;
  ingredientsField: HTMLElement;
  instructionsField: HTMLElement;
  kSlider: HTMLInputElement;
  kValue: HTMLElement;
  seed: HTMLInputElement;
  generateButton: HTMLButtonElement;
  formError: HTMLElement;
  outputPanel: HTMLElement;
  outputText: HTMLElement;
  outputMeta: HTMLElement;
  contextEcho: HTMLElement;
  referencePanel: HTMLElement;
  reportPanel: HTMLElement;
  saveButton: HTMLButtonElement;
  savedList: HTMLElement;
  savedStatus: HTMLElement;
}

export interface App {
  state: SessionState;
  client: RecipeLabClient;
  refreshSaved(): Promise<void>;
  generate(): Promise<void>;
}

function grab(doc: Document): Elements {
  const byId = <T extends HTMLElement>(id: string): T => {
    const node = doc.getElementById(id);
    if (!node) throw new Error(`missing #${id} in document`);
    return node as T;
  };
  return {
    form: byId('generate-form'),
    modeInputs: Array.from(doc.querySelectorAll<HTMLInputElement>('input[name="mode"]')),
    title: byId('title-input'),
    ingredients: byId('ingredients-input'),
    instructions: byId('instructions-input'),
    ingredientsField: byId('ingredients-field'),
    instructionsField: byId('instructions-field'),
    kSlider: byId('k-slider'),
    kValue: byId('k-value'),
    seed: byId('seed-input'),
    generateButton: byId('generate-button'),
    formError: byId('form-error'),
    outputPanel: byId('output-panel'),
    outputText: byId('output-text'),
    outputMeta: byId('output-meta'),
    contextEcho: byId('context-echo'),
    referencePanel: byId('reference-panel'),
    reportPanel: byId('report-panel'),
    saveButton: byId('save-button'),
    savedList: byId('saved-list'),
    savedStatus: byId('saved-status'),
  };
}

export function initApp(doc: Document, config: ClientConfig): App {
  const client = new RecipeLabClient(config);
  const ui = grab(doc);
  let state = initialState();
  const knownRatings: Record<number, number | null> = {};
  const pageSize = 5;

  function syncModeVisibility(): void {
    const editable = editableContextField(state.mode);
    ui.ingredientsField.hidden = editable !== 'ingredients';
    ui.instructionsField.hidden = editable !== 'instructions';
    for (const input of ui.modeInputs) {
      input.checked = input.value === state.mode;
    }
  }

  function syncPending(): void {
    ui.generateButton.disabled = state.pending;
    for (const input of ui.modeInputs) input.disabled = state.pending;
    ui.kSlider.disabled = state.pending;
  }

  function readForm(): void {
    state.title = ui.title.value;
    state.ingredientsText = ui.ingredients.value;
    state.instructionsText = ui.instructions.value;
    const idx = Number(ui.kSlider.value);
    state.k = K_CHOICES[idx] ?? 3;
    state.seed = ui.seed.value.trim() === '' ? null : Number(ui.seed.value);
  }

  function showFormError(message: string): void {
    ui.formError.textContent = message;
    ui.formError.hidden = message === '';
  }

  function renderResponse(): void {
    const response = state.lastResponse;
    if (!response) return;
    ui.outputPanel.hidden = false;

    renderRuns(doc, ui.outputText,
               segmentText(response.output, spansForField(response.highlights, 'generated_text')));

    const request = state.lastRequest;
    const contextText = request?.mode === 'instructions'
      ? (request.ingredients ?? []).join('\n')
      : request?.instructions ?? '';
    renderRuns(doc, ui.contextEcho,
               segmentText(contextText, spansForField(response.highlights, 'ingredients')));

    ui.outputMeta.textContent =
      `k=${response.sampling.k} seed=${response.sampling.seed} ` +
      `${response.elapsed_ms.toFixed(0)} ms` +
      (response.truncated ? ' · truncated before the end token' : '');
    renderReference(doc, ui.referencePanel, response.reference);
    renderReport(doc, ui.reportPanel, response.report);
    ui.saveButton.disabled = false;
  }

  async function generate(): Promise<void> {
    if (state.pending) return;
    readForm();
    const problems = validateForm(state);
    if (problems.length > 0) {
      showFormError(problems.join('; '));
      return;
    }
    showFormError('');
    state.pending = true;
    syncPending();
    try {
      const request = buildGenerateRequest(state);
      const response = await client.generate(request);
      state.lastRequest = request;
      state.lastResponse = response;
      renderResponse();
    } catch (error) {
      showFormError(error instanceof ApiError
        ? `${error.code}: ${error.message}`
        : `request failed: ${String(error)}`);
    } finally {
      state.pending = false;
      syncPending();
    }
  }

  async function refreshSaved(): Promise<void> {
    try {
      const listing = await client.listGenerations(state.savedPage, pageSize);
      renderSavedList(doc, ui.savedList, listing.items, listing.total,
                      listing.page, listing.page_size, knownRatings, {
        onRate: (id, value) => void rate(id, value),
        onComment: (id, text) => void comment(id, text),
        onPage: (page) => {
          state.savedPage = page;
          void refreshSaved();
        },
      });
      ui.savedStatus.textContent = `${listing.total} saved generation(s)`;
    } catch (error) {
      ui.savedStatus.textContent = `could not load saved generations: ${String(error)}`;
    }
  }

  async function rate(id: number, value: number): Promise<void> {
    if (!isValidRating(value)) {
      ui.savedStatus.textContent = 'rating must be an integer from 1 to 5';
      return;
    }
    const previous = knownRatings[id] ?? null;
    knownRatings[id] = value; // optimistic
    await refreshSaved();
    try {
      await client.rate(id, value);
    } catch (error) {
      knownRatings[id] = previous; // roll back
      await refreshSaved();
      ui.savedStatus.textContent = `rating failed: ${String(error)}`;
    }
  }

  async function comment(id: number, text: string): Promise<void> {
    if (!isValidComment(text)) {
      ui.savedStatus.textContent = 'comments must be non-empty and at most 4000 characters';
      return;
    }
    try {
      await client.comment(id, text);
      ui.savedStatus.textContent = `comment added to #${id}`;
    } catch (error) {
      ui.savedStatus.textContent = `comment failed: ${String(error)}`;
    }
  }

  async function save(): Promise<void> {
    const request = state.lastRequest;
    const response = state.lastResponse;
    if (!request || !response) return;
    ui.saveButton.disabled = true;
    const context: Record<string, string> = { title: request.title };
    if (request.mode === 'instructions') {
      context['ingredients'] = (request.ingredients ?? []).join('\n');
    } else {
      context['instructions'] = request.instructions ?? '';
    }
    try {
      await client.saveGeneration({
        mode: request.mode,
        context,
        output: response.output,
        sampling: response.sampling,
        report: response.report,
        reference_id: response.reference?.recipe.id ?? null,
      });
      await refreshSaved();
    } catch (error) {
      ui.savedStatus.textContent = `save failed: ${String(error)}`;
    } finally {
      ui.saveButton.disabled = false;
    }
  }

  // -- wiring ---------------------------------------------------------------

  ui.form.addEventListener('submit', (event) => {
    event.preventDefault();
    void generate();
  });
  for (const input of ui.modeInputs) {
    input.addEventListener('change', () => {
      if (input.checked) {
        state = switchMode(state, input.value as SessionState['mode']);
        syncModeVisibility();
      }
    });
  }
  ui.kSlider.min = '0';
  ui.kSlider.max = String(K_CHOICES.length - 1);
  ui.kSlider.step = '1';
  ui.kSlider.value = String(K_CHOICES.indexOf(3));
  ui.kSlider.addEventListener('input', () => {
    ui.kValue.textContent = String(K_CHOICES[Number(ui.kSlider.value)] ?? 3);
  });
  ui.kValue.textContent = '3';
  ui.saveButton.addEventListener('click', () => void save());
  ui.saveButton.disabled = true;

  syncModeVisibility();
  syncPending();
  void refreshSaved();

  return { state, client, refreshSaved, generate };
}

// Browser entry point; tests import initApp directly instead.
if (typeof window !== 'undefined' && window.document?.getElementById('generate-form')) {
  const config = window.RECIPELAB_CONFIG;
  if (!config) {
    const banner = el(window.document, 'p', 'error',
                      'RECIPELAB_CONFIG missing: deploy config.js with baseUrl and apiKey.');
    window.document.body.prepend(banner);
  } else {
    initApp(window.document, config);
  }
}

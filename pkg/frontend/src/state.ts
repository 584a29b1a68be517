/** Session state and the client-side validation that mirrors the server's
 * GenerateRequest invariants, so bad submissions never leave the browser. */

import type { GenerateRequest, GenerateResponse, Mode } from './api.js';

export const K_CHOICES = [1, 3, 5, 10, 30] as const;
export const DEFAULT_K = 3;

export interface AnnotationDraft {
  rating: number | null;
  comment: string;
}

export interface SessionState {
  mode: Mode;
  title: string;
  /** One ingredient per line; editable in instructions mode only. */
  ingredientsText: string;
  /** Editable in ingredients mode only. */
  instructionsText: string;
  k: number;
  seed: number | null;
  pending: boolean;
  lastRequest: GenerateRequest | null;
  lastResponse: GenerateResponse | null;
  savedPage: number;
  drafts: Record<number, AnnotationDraft>;
}

export function initialState(): SessionState {
  return {
    mode: 'instructions',
    title: '',
    ingredientsText: '',
    instructionsText: '',
    k: DEFAULT_K,
    seed: null,
    pending: false,
    lastRequest: null,
    lastResponse: null,
    savedPage: 1,
    drafts: {},
  };
}

export function ingredientLines(state: SessionState): string[] {
  return state.ingredientsText
    .split('\n')
    .map((line) => line.trim())
    .filter((line) => line.length > 0);
}

/** Which context field the current mode makes editable. */
export function editableContextField(mode: Mode): 'ingredients' | 'instructions' {
  return mode === 'instructions' ? 'ingredients' : 'instructions';
}

/** Switching mode swaps which context field is editable; the shared title
 * and the k setting survive, and the previous response stays on screen. */
export function switchMode(state: SessionState, mode: Mode): SessionState {
  return { ...state, mode };
}

export function validateForm(state: SessionState): string[] {
  const problems: string[] = [];
  if (!state.title.trim()) {
    problems.push('title is required');
  }
  if (!K_CHOICES.includes(state.k as (typeof K_CHOICES)[number])) {
    problems.push(`k must be one of ${K_CHOICES.join(', ')}`);
  }
  if (state.mode === 'instructions') {
    if (ingredientLines(state).length === 0) {
      problems.push('instructions mode needs at least one ingredient line');
    }
  } else if (!state.instructionsText.trim()) {
    problems.push('ingredients mode needs instruction text');
  }
  return problems;
}

/** Only call on a state that validates; mirrors the wire format exactly. */
export function buildGenerateRequest(state: SessionState): GenerateRequest {
  const request: GenerateRequest = {
    mode: state.mode,
    title: state.title.trim(),
    k: state.k,
  };
  if (state.mode === 'instructions') {
    request.ingredients = ingredientLines(state);
  } else {
    request.instructions = state.instructionsText;
  }
  if (state.seed !== null) {
    request.seed = state.seed;
  }
  return request;
}

/** The rating widget only ever submits integers in 1..5. */
export function isValidRating(value: unknown): value is number {
  return typeof value === 'number' && Number.isInteger(value) && value >= 1 && value <= 5;
}

export function isValidComment(text: string): boolean {
  return text.trim().length > 0 && text.length <= 4000;
}

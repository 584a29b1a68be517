import { describe, expect, it } from 'vitest';

import {
  buildGenerateRequest,
  editableContextField,
  ingredientLines,
  initialState,
  isValidComment,
  isValidRating,
  K_CHOICES,
  switchMode,
  validateForm,
} from '../src/state.js';

function filledState() {
  const state = initialState();
  state.title = 'Tomato Soup';
  state.ingredientsText = '2 cups tomatoes\n1 onion\n';
  state.instructionsText = 'Simmer everything. Blend.';
  return state;
}

describe('mode switching', () => {
  it('instructions mode edits ingredients; ingredients mode edits instructions', () => {
    expect(editableContextField('instructions')).toBe('ingredients');
    expect(editableContextField('ingredients')).toBe('instructions');
  });

  it('switchMode preserves the form contents', () => {
    const state = filledState();
    const swapped = switchMode(state, 'ingredients');
    expect(swapped.mode).toBe('ingredients');
    expect(swapped.title).toBe(state.title);
    expect(swapped.ingredientsText).toBe(state.ingredientsText);
  });
});

describe('validation mirrors the server invariants', () => {
  it('requires a title', () => {
    const state = filledState();
    state.title = '  ';
    expect(validateForm(state).join(' ')).toContain('title');
  });

  it('instructions mode requires ingredient lines', () => {
    const state = filledState();
    state.ingredientsText = '\n  \n';
    expect(validateForm(state).join(' ')).toContain('ingredient');
  });

  it('ingredients mode requires instruction text', () => {
    const state = switchMode(filledState(), 'ingredients');
    state.instructionsText = '';
    expect(validateForm(state).join(' ')).toContain('instruction');
  });

  it('k must come from the sweep choices', () => {
    const state = filledState();
    state.k = 7;
    expect(validateForm(state).join(' ')).toContain('k must be one of');
    for (const k of K_CHOICES) {
      state.k = k;
      expect(validateForm(state)).toEqual([]);
    }
  });
});

describe('request building', () => {
  it('instructions mode sends ingredients and omits instructions', () => {
    const request = buildGenerateRequest(filledState());
    expect(request).toEqual({
      mode: 'instructions',
      title: 'Tomato Soup',
      k: 3,
      ingredients: ['2 cups tomatoes', '1 onion'],
    });
    expect('instructions' in request).toBe(false);
  });

  it('ingredients mode sends instructions and omits ingredients', () => {
    const request = buildGenerateRequest(switchMode(filledState(), 'ingredients'));
    expect(request.instructions).toBe('Simmer everything. Blend.');
    expect('ingredients' in request).toBe(false);
  });

  it('seed rides along only when set', () => {
    const state = filledState();
    expect('seed' in buildGenerateRequest(state)).toBe(false);
    state.seed = 99;
    expect(buildGenerateRequest(state).seed).toBe(99);
  });

  it('ingredient lines drop blanks and trim whitespace', () => {
    const state = filledState();
    state.ingredientsText = '  2 eggs  \n\n\n1 cup flour\n ';
    expect(ingredientLines(state)).toEqual(['2 eggs', '1 cup flour']);
  });
});

describe('annotation validation', () => {
  it('ratings accept exactly the integers 1..5', () => {
    for (const good of [1, 2, 3, 4, 5]) expect(isValidRating(good)).toBe(true);
    for (const bad of [0, 6, -1, 2.5, NaN, '4', null, undefined]) {
      expect(isValidRating(bad as never)).toBe(false);
    }
  });

  it('comments must be non-empty and bounded', () => {
    expect(isValidComment('tasty')).toBe(true);
    expect(isValidComment('   ')).toBe(false);
    expect(isValidComment('x'.repeat(4000))).toBe(true);
    expect(isValidComment('x'.repeat(4001))).toBe(false);
  });
});

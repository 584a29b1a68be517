import { describe, expect, it } from 'vitest';

import type { HighlightSpan } from '../src/api.js';
import { segmentText, spansForField, stripMarkup } from '../src/highlight.js';

function span(start: number, end: number, noun = 'x', field: HighlightSpan['field'] = 'generated_text'): HighlightSpan {
  return { field, start, end, root_noun: noun };
}

describe('segmentText', () => {
  it('returns one plain run when there are no spans', () => {
    const runs = segmentText('pour the vodka', []);
    expect(runs).toEqual([{ text: 'pour the vodka', highlighted: false }]);
  });

  it('splits around a single span', () => {
    const text = 'pour the vodka over ice';
    const runs = segmentText(text, [span(9, 14, 'vodka')]);
    expect(runs.map((r) => r.text)).toEqual(['pour the ', 'vodka', ' over ice']);
    expect(runs[1]).toMatchObject({ highlighted: true, rootNoun: 'vodka' });
  });

  it('concatenation reproduces the text byte-for-byte', () => {
    const text = 'mix the eggs, flour and milk — gently. 🍳 done';
    const spans = [span(8, 12, 'egg'), span(14, 19, 'flour'), span(24, 28, 'milk')];
    expect(stripMarkup(segmentText(text, spans))).toBe(text);
  });

  it('survives overlapping and out-of-order spans', () => {
    const text = 'abcdefghij';
    const spans = [span(6, 9, 'b'), span(2, 5, 'a'), span(4, 7, 'c')];
    const runs = segmentText(text, spans);
    expect(stripMarkup(runs)).toBe(text);
    const overlap = runs.find((r) => r.rootNoun?.includes('+'));
    expect(overlap).toBeDefined();
  });

  it('clamps spans that exceed the text', () => {
    const text = 'short';
    expect(stripMarkup(segmentText(text, [span(3, 99, 'x'), span(-2, 2, 'y')]))).toBe(text);
  });

  it('fidelity holds under a seeded fuzz of random spans', () => {
    let state = 20260810;
    const rand = (n: number) => {
      state = (state * 1103515245 + 12345) % 2147483648;
      return state % n;
    };
    const alphabet = 'abc def🍲\nghi jkl ';
    for (let round = 0; round < 200; round++) {
      const length = rand(60);
      let text = '';
      for (let i = 0; i < length; i++) text += alphabet[rand(alphabet.length)];
      const spans: HighlightSpan[] = [];
      const count = rand(6);
      for (let s = 0; s < count; s++) {
        const a = rand(Math.max(1, text.length + 2)) - 1;
        const b = a + rand(8);
        spans.push(span(a, b, `n${rand(3)}`));
      }
      expect(stripMarkup(segmentText(text, spans))).toBe(text);
    }
  });

  it('handles empty text', () => {
    expect(segmentText('', [span(0, 3)])).toEqual([]);
  });
});

describe('spansForField', () => {
  it('filters by document side', () => {
    const spans = [span(0, 1, 'a', 'ingredients'), span(1, 2, 'b', 'generated_text')];
    expect(spansForField(spans, 'ingredients')).toHaveLength(1);
    expect(spansForField(spans, 'generated_text')[0]?.root_noun).toBe('b');
  });
});

/** Split server text into plain and highlighted runs from highlight spans.
 *
 * The invariant the UI lives by: concatenating the runs reproduces the
 * source text byte-for-byte, no matter how the spans overlap or arrive out
 * of order. Highlighting only ever re-labels characters, never edits them.
 */

import type { HighlightField, HighlightSpan } from './api.js';

export interface Run {
  text: string;
  highlighted: boolean;
  /** Root noun for highlighted runs; joined with '+' if spans overlap. */
  rootNoun?: string;
}

export function segmentText(text: string, spans: readonly HighlightSpan[]): Run[] {
  if (text.length === 0) {
    return [];
  }
  // boundary -> root nouns starting there; build a coverage map first
  const labels: (Set<string> | null)[] = new Array(text.length).fill(null);
  for (const span of spans) {
    const start = Math.max(0, Math.min(span.start, text.length));
    const end = Math.max(start, Math.min(span.end, text.length));
    for (let i = start; i < end; i++) {
      (labels[i] ??= new Set()).add(span.root_noun);
    }
  }
  const runs: Run[] = [];
  let runStart = 0;
  const keyAt = (i: number): string | null => {
    const set = labels[i];
    return set ? [...set].sort().join('+') : null;
  };
  let currentKey = keyAt(0);
  for (let i = 1; i <= text.length; i++) {
    const key = i < text.length ? keyAt(i) : undefined;
    if (key !== currentKey) {
      runs.push(
        currentKey === null
          ? { text: text.slice(runStart, i), highlighted: false }
          : { text: text.slice(runStart, i), highlighted: true, rootNoun: currentKey },
      );
      runStart = i;
      currentKey = key as string | null;
    }
  }
  return runs;
}

/** Inverse of rendering: drop the markup, keep the characters. */
export function stripMarkup(runs: readonly Run[]): string {
  return runs.map((run) => run.text).join('');
}

export function spansForField(
  spans: readonly HighlightSpan[],
  field: HighlightField,
): HighlightSpan[] {
  return spans.filter((span) => span.field === field);
}

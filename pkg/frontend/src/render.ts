/** DOM builders. Highlighted text always goes through segmentText and is
 * inserted as text nodes inside <mark> / plain spans, so the rendered
 * textContent equals the server string exactly and nothing is interpreted
 * as HTML. */

import type { EvaluationReport, ReferenceRecipe, SavedGeneration } from './api.js';
import { Run } from './highlight.js';

export function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderRuns(doc: Document, container: HTMLElement, runs: readonly Run[]): void {
  container.textContent = '';
  for (const run of runs) {
    if (run.highlighted) {
      const mark = el(doc, 'mark', 'overlap');
      mark.textContent = run.text;
      if (run.rootNoun) mark.dataset.rootNoun = run.rootNoun;
      container.appendChild(mark);
    } else {
      container.appendChild(doc.createTextNode(run.text));
    }
  }
}

export function renderReference(
  doc: Document,
  container: HTMLElement,
  reference: { recipe: ReferenceRecipe; score: number } | null,
): void {
  container.textContent = '';
  if (!reference) {
    container.appendChild(el(doc, 'p', 'muted', 'No similar recipe found.'));
    return;
  }
  container.appendChild(el(doc, 'h3', undefined, reference.recipe.title));
  container.appendChild(
    el(doc, 'p', 'muted', `similarity score ${reference.score.toFixed(2)}`),
  );
  const ingredients = el(doc, 'ul', 'reference-ingredients');
  for (const line of reference.recipe.ingredients) {
    ingredients.appendChild(el(doc, 'li', undefined, line));
  }
  container.appendChild(ingredients);
  const steps = el(doc, 'ol', 'reference-steps');
  for (const step of reference.recipe.steps) {
    steps.appendChild(el(doc, 'li', undefined, step));
  }
  container.appendChild(steps);
}

const REPORT_LABELS: [keyof EvaluationReport, string][] = [
  ['f1', 'F1'],
  ['n_generated_ingredients', '#Ingr'],
  ['bleu', 'BLEU'],
  ['brevity_penalty', 'BP'],
  ['rouge_l_f', 'R-L'],
  ['nted', 'NTED'],
  ['jaccard_coherence', 'Coherence'],
];

export function renderReport(
  doc: Document,
  container: HTMLElement,
  report: EvaluationReport | null,
): void {
  container.textContent = '';
  if (!report) {
    container.appendChild(el(doc, 'p', 'muted', 'No evaluation (nothing retrieved).'));
    return;
  }
  const row = el(doc, 'div', 'report-row');
  for (const [key, label] of REPORT_LABELS) {
    const value = report[key];
    if (value === null || value === undefined || typeof value === 'string') continue;
    const cell = el(doc, 'span', 'metric');
    cell.appendChild(el(doc, 'b', undefined, label));
    cell.appendChild(
      doc.createTextNode(' ' + (Number.isInteger(value) ? String(value) : value.toFixed(3))),
    );
    row.appendChild(cell);
  }
  container.appendChild(row);
}

export interface SavedListHandlers {
  onRate(id: number, value: number): void;
  onComment(id: number, text: string): void;
  onPage(page: number): void;
}

export function renderStars(
  doc: Document,
  current: number | null,
  onRate: (value: number) => void,
): HTMLElement {
  const wrap = el(doc, 'span', 'stars');
  for (let value = 1; value <= 5; value++) {
    const star = el(doc, 'button', 'star', current !== null && value <= current ? '★' : '☆');
    star.type = 'button';
    star.dataset.value = String(value);
    star.addEventListener('click', () => onRate(value));
    wrap.appendChild(star);
  }
  return wrap;
}

export function renderSavedList(
  doc: Document,
  container: HTMLElement,
  items: readonly SavedGeneration[],
  total: number,
  page: number,
  pageSize: number,
  ratings: Record<number, number | null>,
  handlers: SavedListHandlers,
): void {
  container.textContent = '';
  if (total === 0) {
    container.appendChild(el(doc, 'p', 'muted', 'Nothing saved yet.'));
    return;
  }
  for (const item of items) {
    const card = el(doc, 'div', 'saved-card');
    card.dataset.generationId = String(item.id);
    card.appendChild(
      el(doc, 'h4', undefined, `#${item.id} · ${item.mode} · ${item.context['title'] ?? ''}`),
    );
    card.appendChild(el(doc, 'p', 'saved-output', item.output));
    card.appendChild(
      renderStars(doc, ratings[item.id] ?? null, (value) => handlers.onRate(item.id, value)),
    );
    const commentBox = el(doc, 'input', 'comment-input') as HTMLInputElement;
    commentBox.placeholder = 'add a comment…';
    const commentButton = el(doc, 'button', 'comment-submit', 'Comment');
    commentButton.type = 'button';
    commentButton.disabled = true;
    commentBox.addEventListener('input', () => {
      commentButton.disabled = commentBox.value.trim().length === 0;
    });
    commentButton.addEventListener('click', () => {
      if (commentBox.value.trim()) handlers.onComment(item.id, commentBox.value);
    });
    card.appendChild(commentBox);
    card.appendChild(commentButton);
    container.appendChild(card);
  }
  const pages = Math.max(1, Math.ceil(total / pageSize));
  const nav = el(doc, 'div', 'pager');
  for (let p = 1; p <= pages; p++) {
    const button = el(doc, 'button', p === page ? 'page current' : 'page', String(p));
    button.type = 'button';
    button.addEventListener('click', () => handlers.onPage(p));
    nav.appendChild(button);
  }
  container.appendChild(nav);
}

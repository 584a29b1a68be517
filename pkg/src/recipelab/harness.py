"""Batch evaluation harness: sweep sampling k over a test split and emit one
machine-readable row per sample plus an aggregate summary table with columns
F1, #Ingr, BLEU, BP, R-L, NTED (and model perplexity).

Generation seeds derive deterministically from (base seed, sample id, k,
mode), so reruns reproduce byte-identical rows.
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass
from typing import Optional, Sequence

from . import metrics
from .corpus import RecipeRecord
from .fieldcodec import BpeVocab, FieldKind, make_training_example
from .model import ModelConfig, Params, SamplingConfig, generate_field, perplexity
from .textnorm import IngredientDictionary, word_tokenize

__all__ = ["EvalRow", "run_evaluation", "format_summary_table", "SUMMARY_COLUMNS"]

SUMMARY_COLUMNS = ("F1", "#Ingr", "BLEU", "BP", "R-L", "NTED")


@dataclass(frozen=True)
class EvalRow:
    recipe_id: str
    mode: str
    k: int
    seed: int
    output: str
    stopped: bool
    report: dict

    def to_json(self) -> dict:
        return {
            "recipe_id": self.recipe_id, "mode": self.mode, "k": self.k,
            "seed": self.seed, "stopped": self.stopped, "output": self.output,
            **self.report,
        }


def _sample_seed(base: int, recipe_id: str, k: int, mode: str) -> int:
    return (base * 2654435761 + zlib.crc32(f"{recipe_id}/{k}/{mode}".encode())) % (2**31)


def _mean(values: list[Optional[float]]) -> Optional[float]:
    present = [v for v in values if v is not None]
    return sum(present) / len(present) if present else None


def run_evaluation(
    params: Params,
    config: ModelConfig,
    vocab: BpeVocab,
    records: Sequence[RecipeRecord],
    ks: Sequence[int],
    dictionary: IngredientDictionary,
    verbs: frozenset[str],
    seed: int = 0,
    max_new_tokens: int = 384,
    limit: Optional[int] = None,
    log=None,
) -> tuple[list[EvalRow], dict]:
    """Generate and score both modes for every record and every k."""
    subset = list(records[:limit] if limit else records)
    rows: list[EvalRow] = []
    for k in ks:
        for record in subset:
            for mode in ("ingredients", "instructions"):
                if mode == "instructions":
                    context = {
                        FieldKind.TITLE: record.title,
                        FieldKind.INGREDIENTS: "\n".join(l.name_phrase for l in record.ingredients),
                    }
                    target = FieldKind.INSTRUCTIONS
                else:
                    context = {
                        FieldKind.TITLE: record.title,
                        FieldKind.INSTRUCTIONS: " ".join(record.steps),
                    }
                    target = FieldKind.INGREDIENTS
                s = _sample_seed(seed, record.id, k, mode)
                result = generate_field(
                    params, config, vocab, context, target,
                    SamplingConfig(k=k, max_new_tokens=max_new_tokens, seed=s),
                )
                report = metrics.evaluate(
                    result.text, record, context, mode, dictionary=dictionary, verbs=verbs
                )
                rows.append(EvalRow(
                    recipe_id=record.id, mode=mode, k=k, seed=s,
                    output=result.text, stopped=result.stopped,
                    report=report.to_dict(),
                ))
            if log:
                log(f"k={k} {record.id} done")

    examples = [make_training_example(r, seed=0xE7A1 + i, vocab=vocab, max_len=config.context_len)
                for i, r in enumerate(subset)]
    ppl = perplexity(params, config, examples, vocab.pad_id)

    summary_rows = []
    for k in ks:
        k_rows = [r for r in rows if r.k == k]
        ingr = [r.report for r in k_rows if r.mode == "ingredients"]
        instr_rows = [r for r in k_rows if r.mode == "instructions"]
        instr = [r.report for r in instr_rows]
        pairs = [
            (word_tokenize(r.output).tokens,
             word_tokenize(" ".join(next(rec for rec in subset if rec.id == r.recipe_id).steps)).tokens)
            for r in instr_rows
        ]
        bleu_corpus, _ = metrics.corpus_bleu(pairs)
        summary_rows.append({
            "sampler": "top-k",
            "k": k,
            "F1": _mean([r["f1"] for r in ingr]),
            "#Ingr": _mean([float(r["n_generated_ingredients"]) for r in ingr]),
            "BLEU": _mean([r["bleu"] for r in instr]),
            "BLEU_corpus": bleu_corpus,
            "BP": _mean([r["brevity_penalty"] for r in instr]),
            "R-L": _mean([r["rouge_l_f"] for r in instr]),
            "NTED": _mean([r["nted"] for r in instr]),
            "coherence": _mean([r["jaccard_coherence"] for r in instr]),
        })

    summary = {
        "columns": list(SUMMARY_COLUMNS),
        "rows": summary_rows,
        "ppl": ppl,
        "n_samples": len(subset),
        "seed": seed,
    }
    return rows, summary


def format_summary_table(summary: dict) -> str:
    """Plain-text table mirroring the sweep's column layout."""
    header = f"{'sampler':<18}" + "".join(f"{c:>9}" for c in SUMMARY_COLUMNS) + f"{'PPL':>9}"
    lines = [header, "-" * len(header)]
    for row in summary["rows"]:
        cells = []
        for col in SUMMARY_COLUMNS:
            v = row.get(col)
            cells.append(f"{v:>9.3f}" if v is not None else f"{'-':>9}")
        label = f"top-k (k={row['k']})"
        lines.append(f"{label:<18}" + "".join(cells) + f"{summary['ppl']:>9.2f}")
    return "\n".join(lines)


def save_rows(rows: list[EvalRow], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row.to_json(), ensure_ascii=False) + "\n")

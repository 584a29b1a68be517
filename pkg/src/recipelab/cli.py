"""Operator entry points for the offline pipeline and the server.

Stages communicate through files: prepare writes the filtered corpus and the
split manifest, train-bpe writes the vocabulary, train writes a checkpoint
carrying the vocabulary hash, and evaluate/serve refuse artifacts whose
hashes do not line up.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from . import bundled_corpus_path
from . import corpus as corpus_mod
from . import fieldcodec as fc
from . import harness
from . import metrics
from . import model as model_mod
from . import retrieval
from .store import GenerationStore
from .textnorm import IngredientDictionary


def _fail(message: str) -> None:
    raise click.ClickException(message)


def _load_prepared(corpus_path):
    if not Path(corpus_path).exists():
        _fail(f"corpus file not found: {corpus_path}")
    return corpus_mod.load_records(corpus_path)


def _load_vocab(vocab_path) -> fc.BpeVocab:
    if not Path(vocab_path).exists():
        _fail(f"vocabulary file not found: {vocab_path}")
    return fc.BpeVocab.load(vocab_path)


def _load_checkpoint(checkpoint_path, vocab: fc.BpeVocab):
    if not Path(checkpoint_path).exists():
        _fail(f"checkpoint not found: {checkpoint_path}")
    try:
        params, config, vocab_hash, step = model_mod.load_checkpoint(
            checkpoint_path, expected_vocab_hash=vocab.content_hash())
    except model_mod.VocabMismatch as exc:
        _fail(str(exc))
    return params, config, vocab_hash, step


@click.group()
def main():
    """Recipe generation and evaluation studio."""


@main.command()
@click.option("--corpus", "corpus_path", default=None,
              help="Raw corpus (jsonl). Defaults to the bundled sample corpus.")
@click.option("--out", "out_dir", required=True, type=click.Path(), help="Output directory.")
@click.option("--seed", default=7, show_default=True, help="Split shuffle seed.")
@click.option("--n-val", default=10, show_default=True)
@click.option("--n-test", default=10, show_default=True)
def prepare(corpus_path, out_dir, seed, n_val, n_test):
    """Ingest, filter, and split the corpus; write records + split manifest."""
    src = corpus_path or str(bundled_corpus_path())
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records, rejected = corpus_mod.load_filtered_corpus(src)
    reasons: dict[str, int] = {}
    for r in rejected:
        reasons[r.reason] = reasons.get(r.reason, 0) + 1
        click.echo(f"rejected {r.source_id}: {r.reason}")
    split = corpus_mod.split_corpus(records, seed=seed, n_val=n_val, n_test=n_test)
    corpus_mod.save_records(records, out / "records.jsonl")
    corpus_mod.save_split(split, out / "split.json")
    click.echo(f"accepted {len(records)} recipes, rejected {len(rejected)} "
               f"({json.dumps(reasons) if reasons else 'none'})")
    click.echo(f"split: train={len(split.train)} val={len(split.validation)} "
               f"test={len(split.test)} seed={seed}")
    click.echo(f"wrote {out / 'records.jsonl'} and {out / 'split.json'}")


@main.command("train-bpe")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(),
              help="Prepared records.jsonl from the prepare stage.")
@click.option("--merges", default=4096, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(), help="Vocabulary file.")
def train_bpe_cmd(corpus_path, merges, out_path):
    """Train the byte-pair vocabulary on the prepared corpus."""
    records = _load_prepared(corpus_path)
    texts = [r.title + "\n" + "\n".join(l.name_phrase for l in r.ingredients)
             + "\n" + " ".join(r.steps) for r in records]
    vocab = fc.train_bpe(texts, merge_count=merges)
    vocab.save(out_path)
    click.echo(f"learned {len(vocab.merges)} merges (requested {merges}); "
               f"vocab size {vocab.vocab_size}; hash {vocab.content_hash()[:12]}")
    click.echo(f"wrote {out_path}")


@main.command("train")
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--split", "split_path", required=True, type=click.Path())
@click.option("--vocab", "vocab_path", required=True, type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path(), help="Checkpoint file (.npz).")
@click.option("--steps", default=500, show_default=True)
@click.option("--lr", default=1e-4, show_default=True)
@click.option("--batch-size", default=8, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--layers", default=4, show_default=True)
@click.option("--heads", default=4, show_default=True)
@click.option("--embed-dim", default=128, show_default=True)
@click.option("--context-len", default=512, show_default=True)
def train_cmd(corpus_path, split_path, vocab_path, out_path, steps, lr, batch_size,
              seed, layers, heads, embed_dim, context_len):
    """Train the language model; writes checkpoint + metrics trace."""
    records = _load_prepared(corpus_path)
    if not Path(split_path).exists():
        _fail(f"split manifest not found: {split_path}")
    split = corpus_mod.load_split(split_path)
    vocab = _load_vocab(vocab_path)
    by_id = {r.id: r for r in records}
    missing = [i for i in split.train + split.validation if i not in by_id]
    if missing:
        _fail(f"split references unknown recipe ids (e.g. {missing[0]}); "
              f"re-run prepare or fix --split")
    train_recs = [by_id[i] for i in split.train]
    val_recs = [by_id[i] for i in split.validation]
    config = model_mod.ModelConfig(
        vocab_size=vocab.vocab_size, n_layers=layers, n_heads=heads,
        embed_dim=embed_dim, context_len=context_len)
    tc = model_mod.TrainConfig(lr=lr, batch_size=batch_size, steps=steps,
                               seed=seed, max_len=context_len)
    trace_path = str(Path(out_path).with_suffix(".trace.jsonl"))
    _, trace = model_mod.train(config, vocab, train_recs, val_recs, tc,
                               checkpoint_path=out_path, trace_path=trace_path,
                               log=click.echo)
    click.echo(f"final val PPL {trace[-1][1]:.2f} (initial {trace[0][1]:.2f})")
    click.echo(f"wrote {out_path} and {trace_path}")


@main.command("generate")
@click.option("--vocab", "vocab_path", required=True, type=click.Path())
@click.option("--checkpoint", "checkpoint_path", required=True, type=click.Path())
@click.option("--mode", type=click.Choice(["instructions", "ingredients"]), required=True)
@click.option("--title", required=True)
@click.option("--ingredient", "ingredients", multiple=True,
              help="Repeatable; required for --mode instructions.")
@click.option("--instructions", "instructions_text", default=None,
              help="Required for --mode ingredients.")
@click.option("--k", default=3, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--max-new-tokens", default=384, show_default=True)
def generate_cmd(vocab_path, checkpoint_path, mode, title, ingredients,
                 instructions_text, k, seed, max_new_tokens):
    """One-shot generation from flags."""
    vocab = _load_vocab(vocab_path)
    params, config, _, _ = _load_checkpoint(checkpoint_path, vocab)
    if mode == "instructions":
        if not ingredients:
            _fail("--mode instructions requires at least one --ingredient")
        context = {fc.FieldKind.TITLE: title,
                   fc.FieldKind.INGREDIENTS: "\n".join(ingredients)}
        target = fc.FieldKind.INSTRUCTIONS
    else:
        if not instructions_text:
            _fail("--mode ingredients requires --instructions")
        context = {fc.FieldKind.TITLE: title,
                   fc.FieldKind.INSTRUCTIONS: instructions_text}
        target = fc.FieldKind.INGREDIENTS
    result = model_mod.generate_field(
        params, config, vocab, context, target,
        model_mod.SamplingConfig(k=k, max_new_tokens=max_new_tokens, seed=seed))
    click.echo(result.text)
    if result.truncated:
        click.echo("[truncated: token budget exhausted before the end token]", err=True)


@main.command("evaluate")
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--split", "split_path", required=True, type=click.Path())
@click.option("--vocab", "vocab_path", required=True, type=click.Path())
@click.option("--checkpoint", "checkpoint_path", required=True, type=click.Path())
@click.option("--k", "k_list", default="1,3,5,10,30", show_default=True,
              help="Comma-separated sweep of sampling k values.")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True)
@click.option("--limit", default=None, type=int, help="Evaluate only the first N test recipes.")
def evaluate_cmd(corpus_path, split_path, vocab_path, checkpoint_path, k_list,
                 out_dir, seed, limit):
    """k-sweep batch evaluation over the test split; writes rows + summary."""
    records = _load_prepared(corpus_path)
    split = corpus_mod.load_split(split_path)
    vocab = _load_vocab(vocab_path)
    params, config, _, _ = _load_checkpoint(checkpoint_path, vocab)
    by_id = {r.id: r for r in records}
    test_records = [by_id[i] for i in split.test if i in by_id]
    if not test_records:
        _fail("test split is empty")
    ks = [int(x) for x in k_list.split(",") if x.strip()]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows, summary = harness.run_evaluation(
        params, config, vocab, test_records, ks,
        dictionary=IngredientDictionary.bundled(), verbs=metrics.load_verb_lexicon(),
        seed=seed, limit=limit)
    harness.save_rows(rows, out / "rows.jsonl")
    (out / "summary.json").write_text(json.dumps(summary, indent=2), encoding="utf-8")
    click.echo(harness.format_summary_table(summary))
    click.echo(f"wrote {out / 'rows.jsonl'} and {out / 'summary.json'}")


@main.command("index")
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--out", "out_path", default=None, type=click.Path(),
              help="Optional index self-check report file.")
def index_cmd(corpus_path, out_path):
    """Build the retrieval index and report self-retrieval accuracy."""
    records = _load_prepared(corpus_path)
    index = retrieval.build_index(records)
    hits = 0
    for r in records:
        query = {"title": r.title, "ingredients": "\n".join(l.name_phrase for l in r.ingredients)}
        results = retrieval.search(index, query, top_n=1)
        hits += bool(results and results[0].recipe_id == r.id)
    rate = hits / len(records) if records else 0.0
    click.echo(f"indexed {len(records)} recipes; self-retrieval top-1 rate {rate:.3f}")
    if out_path:
        Path(out_path).write_text(json.dumps(
            {"documents": len(records), "self_retrieval_rate": rate}, indent=2),
            encoding="utf-8")
        click.echo(f"wrote {out_path}")


@main.command("serve")
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--vocab", "vocab_path", required=True, type=click.Path())
@click.option("--checkpoint", "checkpoint_path", required=True, type=click.Path())
@click.option("--store", "store_path", default="generations.log", show_default=True,
              type=click.Path())
@click.option("--bind", default="127.0.0.1:8080", show_default=True)
@click.option("--api-key-env", default="RECIPELAB_API_KEY", show_default=True,
              help="Environment variable holding the API key.")
def serve_cmd(corpus_path, vocab_path, checkpoint_path, store_path, bind, api_key_env):
    """Run the REST service."""
    import uvicorn

    from .service import AppState, create_app

    api_key = os.environ.get(api_key_env)
    if not api_key:
        _fail(f"environment variable {api_key_env} is empty; set it to the API key")
    records = _load_prepared(corpus_path)
    vocab = _load_vocab(vocab_path)
    params, config, vocab_hash, _ = _load_checkpoint(checkpoint_path, vocab)
    state = AppState(
        api_key=api_key, records=records, vocab=vocab, params=params,
        config=config, store=GenerationStore(store_path), vocab_hash=vocab_hash)
    app = create_app(state)
    host, _, port = bind.partition(":")
    click.echo(f"serving on http://{bind} (corpus={len(records)} recipes, "
               f"vocab {vocab_hash[:12]})")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8080), log_level="warning")


if __name__ == "__main__":
    sys.exit(main())

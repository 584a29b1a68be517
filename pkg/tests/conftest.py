import json
import subprocess
import sys
import time
from pathlib import Path

import pytest

from recipelab import bundled_corpus_path
from recipelab import corpus as corpus_mod
from recipelab import fieldcodec as fc
from recipelab import metrics
from recipelab import model as model_mod
from recipelab.textnorm import IngredientDictionary


@pytest.fixture(scope="session")
def bundled_records():
    records, _ = corpus_mod.load_filtered_corpus(bundled_corpus_path())
    return records


@pytest.fixture(scope="session")
def dictionary():
    return IngredientDictionary.bundled()


@pytest.fixture(scope="session")
def verbs():
    return metrics.load_verb_lexicon()


@pytest.fixture(scope="session")
def small_vocab(bundled_records):
    texts = [r.title + "\n" + "\n".join(l.name_phrase for l in r.ingredients)
             + "\n" + " ".join(r.steps) for r in bundled_records[:80]]
    return fc.train_bpe(texts, merge_count=512)


def _run_cli(args, **kw):
    proc = subprocess.run(
        [sys.executable, "-m", "recipelab.cli", *args],
        capture_output=True, text=True, **kw,
    )
    if proc.returncode != 0:
        raise RuntimeError(f"cli {args[0]} failed:\n{proc.stdout}\n{proc.stderr}")
    return proc.stdout


class TrainedArtifacts:
    """Products of one full prepare -> train-bpe -> train -> index run."""

    def __init__(self, workdir: Path, wall_seconds: float):
        self.dir = workdir
        self.wall_seconds = wall_seconds
        self.records_path = workdir / "records.jsonl"
        self.split_path = workdir / "split.json"
        self.vocab_path = workdir / "vocab.txt"
        self.checkpoint_path = workdir / "model.npz"
        self.trace_path = workdir / "model.trace.jsonl"
        self.records = corpus_mod.load_records(self.records_path)
        self.split = corpus_mod.load_split(self.split_path)
        self.vocab = fc.BpeVocab.load(self.vocab_path)
        self.params, self.config, self.vocab_hash, self.step = model_mod.load_checkpoint(
            self.checkpoint_path)
        self.by_id = {r.id: r for r in self.records}
        self.trace = [json.loads(line) for line in self.trace_path.read_text().splitlines()]

    def train_records(self):
        return [self.by_id[i] for i in self.split.train]

    def test_records(self):
        return [self.by_id[i] for i in self.split.test]


@pytest.fixture(scope="session")
def trained(tmp_path_factory) -> TrainedArtifacts:
    """Run the full offline pipeline through the CLI, once per session."""
    workdir = tmp_path_factory.mktemp("pipeline")
    t0 = time.monotonic()
    _run_cli(["prepare", "--out", str(workdir), "--seed", "7"])
    _run_cli(["train-bpe", "--corpus", str(workdir / "records.jsonl"),
              "--out", str(workdir / "vocab.txt")])
    _run_cli(["train",
              "--corpus", str(workdir / "records.jsonl"),
              "--split", str(workdir / "split.json"),
              "--vocab", str(workdir / "vocab.txt"),
              "--out", str(workdir / "model.npz"),
              "--steps", "500", "--seed", "0"])
    _run_cli(["index", "--corpus", str(workdir / "records.jsonl"),
              "--out", str(workdir / "index-report.json")])
    return TrainedArtifacts(workdir, wall_seconds=time.monotonic() - t0)

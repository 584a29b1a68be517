#!/usr/bin/env python3
"""Walk through corpus ingestion: parsing ingredient lines, splitting
sentences, and the quality filters.

Run from the repo root:  python demos/01_corpus_and_parsing.py
"""

from recipelab import bundled_corpus_path
from recipelab.corpus import (
    load_filtered_corpus,
    parse_ingredient_line,
    split_corpus,
    split_sentences,
)

print("== Ingredient line parsing ==")
for line in [
    "1 cup shredded provolone cheese",
    "2 tablespoons olive oil, divided",
    "1 (14 ounce) can diced tomatoes, drained",
    "1 1/2 cups buttermilk",
    "½ teaspoon smoked paprika",
    "salt and pepper to taste",
]:
    parsed = parse_ingredient_line(line)
    print(f"  {line!r}")
    print(f"    -> name={parsed.name_phrase!r} qty={parsed.quantity} "
          f"unit={parsed.unit} root={parsed.root_noun!r}")

print("\n== Sentence splitting ==")
text = "Preheat the oven to 375 degrees. Bake for 1.5 hours. Rest for approx. 10 minutes. Serve!"
for i, sentence in enumerate(split_sentences(text), 1):
    print(f"  {i}. {sentence}")

print("\n== Filtering the bundled corpus ==")
records, rejected = load_filtered_corpus(bundled_corpus_path())
print(f"  accepted {len(records)} recipes")
for r in rejected:
    print(f"  rejected {r.source_id}: {r.reason}")

print("\n== Deterministic split ==")
split = split_corpus(records, seed=7, n_val=10, n_test=10)
print(f"  train={len(split.train)} validation={len(split.validation)} test={len(split.test)}")
print(f"  first test ids: {split.test[:4]}")

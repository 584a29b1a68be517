#!/usr/bin/env python3
"""BM25 retrieval of the closest reference recipe plus overlap highlighting,
the two halves of the side-by-side comparison view.
"""

from recipelab import bundled_corpus_path
from recipelab.corpus import load_filtered_corpus, parse_ingredient_line
from recipelab.retrieval import build_index, search
from recipelab.textnorm import IngredientDictionary, ingredients_field_text, overlap_highlights

records, _ = load_filtered_corpus(bundled_corpus_path())
index = build_index(records)
print(f"indexed {len(records)} recipes")

print("\n== Query by partial context ==")
hits = search(index, {"title": "tomato soup", "ingredients": "tomatoes\nonion\nbroth"}, top_n=3)
for hit in hits:
    print(f"  {hit.score:7.2f}  {hit.recipe_id}  {next(r.title for r in records if r.id == hit.recipe_id)}")
    print(f"           per-field: { {k: round(v, 2) for k, v in hit.breakdown.items()} }")

print("\n== Self-retrieval sanity ==")
sample = records[42]
hits = search(index, {"title": sample.title,
                      "ingredients": "\n".join(l.name_phrase for l in sample.ingredients)},
              top_n=1)
print(f"  query of {sample.id} returns {hits[0].recipe_id} first: {hits[0].recipe_id == sample.id}")

print("\n== Overlap highlighting ==")
dictionary = IngredientDictionary.bundled()
lines = [parse_ingredient_line(l) for l in
         ["2 ounces vodka", "4 ounces cranberry juice", "1 lime, cut into wedges"]]
generated = "Pour the vodka over ice. Top with the cranberry juice and a lime wedge."
spans = overlap_highlights(lines, generated, dictionary)
ing_text = ingredients_field_text(lines)
print(f"  ingredients field:\n    " + ing_text.replace("\n", "\n    "))
print(f"  generated: {generated}")
for span in spans:
    source = ing_text if span.field == "ingredients" else generated
    print(f"    {span.field:>14} [{span.start:>3}:{span.end:<3}] "
          f"{source[span.start:span.end]!r} -> {span.root_noun}")

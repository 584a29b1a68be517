#!/usr/bin/env python3
"""Tour of the evaluation metrics: ingredient F1, BLEU with brevity penalty,
ROUGE-L, instruction trees with normalized tree edit distance, and
between-field ingredient coherence.
"""

from recipelab.metrics import (
    EditCost,
    bleu,
    build_instruction_tree,
    coherence_jaccard,
    ingredient_f1,
    load_verb_lexicon,
    nted,
    rouge_l,
    zhang_shasha,
)
from recipelab.textnorm import IngredientDictionary, extract_ingredient_nouns, word_tokenize

dictionary = IngredientDictionary.bundled()
verbs = load_verb_lexicon()

print("== Ingredient F1 over root nouns ==")
generated = frozenset({"cheese", "egg", "flour"})
gold = frozenset({"cheese", "flour", "butter"})
p, r, f = ingredient_f1(generated, gold)
print(f"  {sorted(generated)} vs {sorted(gold)} -> P={p:.3f} R={r:.3f} F1={f:.3f}")

print("\n== BLEU with brevity penalty ==")
reference = word_tokenize("Simmer the tomatoes gently then blend until smooth.").tokens
candidate = word_tokenize("Simmer the tomatoes then blend.").tokens
score, bp = bleu(candidate, reference)
print(f"  BLEU={score:.3f} BP={bp:.3f} (short candidate is penalized)")

print("\n== ROUGE-L ==")
p, r, f = rouge_l(candidate, reference)
print(f"  P={p:.3f} R={r:.3f} F={f:.3f}")

print("\n== Instruction trees and NTED ==")
steps_a = ["Mix the egg and flour.", "Bake until golden."]
steps_b = ["Mix the flour.", "Bake until golden."]
tree_a = build_instruction_tree(steps_a, verbs, dictionary)
tree_b = build_instruction_tree(steps_b, verbs, dictionary)
print(f"  tree A: {tree_a!r}")
print(f"  tree B: {tree_b!r}")
distance = zhang_shasha(tree_a, tree_b, EditCost())
print(f"  edit distance {distance} over {tree_a.node_count}+{tree_b.node_count} nodes "
      f"-> NTED {nted(tree_a, tree_b):.4f}")

print("\n== Between-field ingredient coherence ==")
instructions = "Pour the vodka over ice and top with cranberry juice."
listed = frozenset({"vodka", "juice", "ice", "lime"})
mentioned = extract_ingredient_nouns(instructions, dictionary)
print(f"  listed {sorted(listed)}")
print(f"  mentioned {sorted(mentioned)}")
print(f"  Jaccard {coherence_jaccard(mentioned, listed):.3f}")

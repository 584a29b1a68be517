"""Evaluation metrics: ingredient F1, BLEU with brevity penalty, ROUGE-L,
instruction trees, Zhang-Shasha tree edit distance, NTED, and between-field
ingredient coherence, plus a one-call report for a single generation.

Empty-input conventions (documented, not universal): F1 and Jaccard are 1.0
when both sides are empty and 0.0 when exactly one is; ROUGE-L follows the
same convention. BLEU of an empty candidate is 0.
"""

from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Mapping, Optional, Sequence

from .corpus import RecipeRecord, parse_ingredient_line, split_sentences, EmptyAfterStripping
from .fieldcodec import FieldKind
from .textnorm import (
    IngredientDictionary,
    RootNounSet,
    extract_ingredient_nouns,
    lemmatize,
    word_tokenize,
)

__all__ = [
    "NGramProfile",
    "TreeNode",
    "EditCost",
    "EvaluationReport",
    "BothTreesEmpty",
    "ingredient_f1",
    "bleu",
    "rouge_l",
    "build_instruction_tree",
    "zhang_shasha",
    "nted",
    "coherence_jaccard",
    "evaluate",
    "load_verb_lexicon",
]


class BothTreesEmpty(ValueError):
    pass


@dataclass(frozen=True)
class NGramProfile:
    """Counts of order-n token windows of one sequence."""

    n: int
    counts: Counter

    @classmethod
    def from_tokens(cls, tokens: Sequence[str], n: int) -> "NGramProfile":
        grams = Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))
        return cls(n=n, counts=grams)

    @property
    def total(self) -> int:
        return sum(self.counts.values())


def ingredient_f1(generated: RootNounSet, gold: RootNounSet) -> tuple[float, float, float]:
    """Set precision/recall/F1 over lemmatized root nouns."""
    if not generated and not gold:
        return 1.0, 1.0, 1.0
    if not generated or not gold:
        return 0.0, 0.0, 0.0
    hits = len(set(generated) & set(gold))
    p = hits / len(generated)
    r = hits / len(gold)
    f = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return p, r, f


def bleu(
    candidate: Sequence[str],
    reference: Sequence[str],
    max_n: int = 4,
    smooth: bool = True,
) -> tuple[float, float]:
    """BLEU with brevity penalty min(1, exp(1 - |ref|/|cand|)).

    Geometric mean of clipped modified n-gram precisions over orders the
    candidate is long enough to have. With smoothing, a zero numerator gets
    add-one smoothing for that order; unsmoothed, any zero precision zeroes
    the score. Empty candidate scores 0 (BP computed with length 1).
    """
    if len(candidate) == 0:
        bp = min(1.0, math.exp(1.0 - len(reference))) if reference else 1.0
        return 0.0, bp
    bp = min(1.0, math.exp(1.0 - len(reference) / len(candidate)))
    log_sum = 0.0
    orders = 0
    for n in range(1, max_n + 1):
        cand = NGramProfile.from_tokens(candidate, n)
        if cand.total == 0:
            break
        ref = NGramProfile.from_tokens(reference, n)
        clipped = sum(min(c, ref.counts.get(g, 0)) for g, c in cand.counts.items())
        if clipped == 0:
            if not smooth:
                return 0.0, bp
            precision = 1.0 / (cand.total + 1)
        else:
            precision = clipped / cand.total
        log_sum += math.log(precision)
        orders += 1
    score = math.exp(log_sum / orders) * bp if orders else 0.0
    return score, bp


def corpus_bleu(
    pairs: Sequence[tuple[Sequence[str], Sequence[str]]],
    max_n: int = 4,
    smooth: bool = False,
) -> tuple[float, float]:
    """Corpus-level BLEU: n-gram counts pooled over all pairs before combining.

    Complements the mean of sentence-level scores; reported unsmoothed by
    default since pooled counts rarely hit zero.
    """
    clipped = [0] * max_n
    totals = [0] * max_n
    cand_len = 0
    ref_len = 0
    for candidate, reference in pairs:
        cand_len += len(candidate)
        ref_len += len(reference)
        for n in range(1, max_n + 1):
            cand = NGramProfile.from_tokens(candidate, n)
            if cand.total == 0:
                continue
            ref = NGramProfile.from_tokens(reference, n)
            clipped[n - 1] += sum(min(c, ref.counts.get(g, 0)) for g, c in cand.counts.items())
            totals[n - 1] += cand.total
    if cand_len == 0:
        return 0.0, min(1.0, math.exp(1.0 - ref_len)) if ref_len else 1.0
    bp = min(1.0, math.exp(1.0 - ref_len / cand_len))
    log_sum = 0.0
    orders = 0
    for n in range(max_n):
        if totals[n] == 0:
            break
        num, den = clipped[n], totals[n]
        if num == 0:
            if not smooth:
                return 0.0, bp
            num, den = 1, den + 1
        log_sum += math.log(num / den)
        orders += 1
    return (math.exp(log_sum / orders) * bp if orders else 0.0), bp


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> tuple[float, float, float]:
    """LCS-based precision, recall, F. Both empty -> (1, 1, 1)."""
    if not candidate and not reference:
        return 1.0, 1.0, 1.0
    if not candidate or not reference:
        return 0.0, 0.0, 0.0
    m, n = len(candidate), len(reference)
    prev = [0] * (n + 1)
    for i in range(1, m + 1):
        cur = [0] * (n + 1)
        ci = candidate[i - 1]
        for j in range(1, n + 1):
            if ci == reference[j - 1]:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = cur[j - 1] if cur[j - 1] >= prev[j] else prev[j]
        prev = cur
    lcs = prev[n]
    p = lcs / m
    r = lcs / n
    f = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return p, r, f


# ---------------------------------------------------------------------------
# Instruction trees and tree edit distance.

@dataclass
class TreeNode:
    """Ordered labeled tree; verbs sit on stems, nouns on leaves."""

    label: str
    children: list["TreeNode"] = field(default_factory=list)

    def add(self, node: "TreeNode") -> "TreeNode":
        self.children.append(node)
        return self

    @property
    def node_count(self) -> int:
        return 1 + sum(c.node_count for c in self.children)

    def __repr__(self):
        if not self.children:
            return self.label
        return f"{self.label}({', '.join(repr(c) for c in self.children)})"


ROOT_LABEL = "<recipe>"


def load_verb_lexicon(path=None) -> frozenset[str]:
    """Cooking-action verbs, one per line, '#' comments permitted."""
    if path is None:
        text = resources.files("recipelab.data").joinpath("cooking_verbs.txt").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    verbs = set()
    for raw in text.splitlines():
        entry = raw.split("#", 1)[0].strip().lower()
        if entry:
            verbs.add(lemmatize(entry))
    return frozenset(verbs)


def build_instruction_tree(
    steps: Sequence[str],
    verbs: frozenset[str],
    dictionary: IngredientDictionary,
) -> TreeNode:
    """Verb-stem / noun-leaf tree under a synthetic root.

    Scanning each step in order: every verb-lexicon hit opens a stem under
    the root, and subsequent dictionary nouns up to the next verb become its
    leaves. Nouns before any verb attach directly to the root.
    """
    root = TreeNode(ROOT_LABEL)
    for step in steps:
        current: TreeNode | None = None
        for token in word_tokenize(step).tokens:
            if not token.isalpha():
                continue
            lemma = lemmatize(token)
            if lemma in verbs:
                current = TreeNode(lemma)
                root.add(current)
            elif lemma in dictionary:
                (current or root).add(TreeNode(lemma))
    return root


@dataclass(frozen=True)
class EditCost:
    insert: float = 1.0
    remove: float = 1.0
    replace: float = 1.0

    def __post_init__(self):
        if min(self.insert, self.remove, self.replace) < 0:
            raise ValueError("edit costs must be non-negative")
        if self.replace > self.insert + self.remove:
            warnings.warn("replace cost exceeds insert + remove; replace will never be chosen")


def _postorder(root: TreeNode) -> tuple[list[str], list[int], list[int]]:
    """Labels, leftmost-leaf-descendant indices, and keyroots in postorder."""
    labels: list[str] = []
    lmds: list[int] = []

    def walk(node: TreeNode) -> int:
        first_leaf = None
        for child in node.children:
            leaf = walk(child)
            if first_leaf is None:
                first_leaf = leaf
        labels.append(node.label)
        index = len(labels) - 1
        lmds.append(first_leaf if first_leaf is not None else index)
        return lmds[index]

    walk(root)
    keyroot_for_lmd: dict[int, int] = {}
    for i, l in enumerate(lmds):
        keyroot_for_lmd[l] = i
    keyroots = sorted(keyroot_for_lmd.values())
    return labels, lmds, keyroots


def zhang_shasha(t1: TreeNode, t2: TreeNode, costs: EditCost = EditCost()) -> float:
    """Exact edit distance between ordered labeled trees.

    Classic keyroot / leftmost-leaf decomposition; replace costs nothing when
    labels already match. Symmetric under unit costs.
    """
    l1, lmd1, kr1 = _postorder(t1)
    l2, lmd2, kr2 = _postorder(t2)
    n1, n2 = len(l1), len(l2)
    treedist = [[0.0] * n2 for _ in range(n1)]
    ins, rem, rep = costs.insert, costs.remove, costs.replace

    for i in kr1:
        for j in kr2:
            li, lj = lmd1[i], lmd2[j]
            m = i - li + 2
            n = j - lj + 2
            fd = [[0.0] * n for _ in range(m)]
            ioff = li - 1
            joff = lj - 1
            for x in range(1, m):
                fd[x][0] = fd[x - 1][0] + rem
            for y in range(1, n):
                fd[0][y] = fd[0][y - 1] + ins
            for x in range(1, m):
                row = fd[x]
                prev = fd[x - 1]
                for y in range(1, n):
                    if li == lmd1[x + ioff] and lj == lmd2[y + joff]:
                        subst = 0.0 if l1[x + ioff] == l2[y + joff] else rep
                        best = min(prev[y] + rem, row[y - 1] + ins, prev[y - 1] + subst)
                        row[y] = best
                        treedist[x + ioff][y + joff] = best
                    else:
                        p = lmd1[x + ioff] - 1 - ioff
                        q = lmd2[y + joff] - 1 - joff
                        row[y] = min(
                            prev[y] + rem,
                            row[y - 1] + ins,
                            fd[p][q] + treedist[x + ioff][y + joff],
                        )
    return treedist[n1 - 1][n2 - 1]


def nted(t1: TreeNode, t2: TreeNode, costs: EditCost = EditCost()) -> float:
    """Tree edit distance normalized by the total node count of both trees."""
    total = t1.node_count + t2.node_count
    if total == 0:
        raise BothTreesEmpty("cannot normalize over zero nodes")
    return zhang_shasha(t1, t2, costs) / total


def coherence_jaccard(a: RootNounSet, b: RootNounSet) -> float:
    """|a ∩ b| / |a ∪ b|; two empty sets count as perfectly coherent."""
    sa, sb = set(a), set(b)
    if not sa and not sb:
        return 1.0
    return len(sa & sb) / len(sa | sb)


# ---------------------------------------------------------------------------
# One-call evaluation report.

@dataclass(frozen=True)
class EvaluationReport:
    mode: str
    precision: Optional[float] = None
    recall: Optional[float] = None
    f1: Optional[float] = None
    n_generated_ingredients: Optional[int] = None
    bleu: Optional[float] = None
    brevity_penalty: Optional[float] = None
    rouge_l_f: Optional[float] = None
    nted: Optional[float] = None
    jaccard_coherence: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "n_generated_ingredients": self.n_generated_ingredients,
            "bleu": self.bleu,
            "brevity_penalty": self.brevity_penalty,
            "rouge_l_f": self.rouge_l_f,
            "nted": self.nted,
            "jaccard_coherence": self.jaccard_coherence,
        }


def _ingredient_nouns_from_lines(lines: Iterable[str]) -> RootNounSet:
    nouns = set()
    for line in lines:
        if not line.strip():
            continue
        try:
            nouns.add(parse_ingredient_line(line).root_noun)
        except EmptyAfterStripping:
            continue
    return frozenset(nouns)


def evaluate(
    generated: str,
    reference: RecipeRecord,
    context: Mapping[FieldKind, str],
    mode: str,
    dictionary: IngredientDictionary,
    verbs: frozenset[str],
) -> EvaluationReport:
    """Score one generation against a reference recipe.

    Ingredient mode fills F1 fields and the generated-line count; instruction
    mode fills BLEU/BP/ROUGE-L/NTED plus coherence of the generated text with
    the context's ingredient list. Fields for the other mode stay None.
    """
    if mode not in ("ingredients", "instructions"):
        raise ValueError(f"unknown evaluation mode {mode!r}")

    if mode == "ingredients":
        lines = [l for l in generated.splitlines() if l.strip()]
        gen_nouns = _ingredient_nouns_from_lines(lines)
        gold_nouns = frozenset(l.root_noun for l in reference.ingredients)
        p, r, f = ingredient_f1(gen_nouns, gold_nouns)
        return EvaluationReport(
            mode=mode, precision=p, recall=r, f1=f, n_generated_ingredients=len(lines)
        )

    cand = word_tokenize(generated).tokens
    ref = word_tokenize(" ".join(reference.steps)).tokens
    bleu_score, bp = bleu(cand, ref)
    _, _, rl_f = rouge_l(cand, ref)
    gen_tree = build_instruction_tree(split_sentences(generated), verbs, dictionary)
    ref_tree = build_instruction_tree(reference.steps, verbs, dictionary)
    tree_score = nted(gen_tree, ref_tree)

    context_ingredients = context.get(FieldKind.INGREDIENTS, "")
    coherence = coherence_jaccard(
        extract_ingredient_nouns(generated, dictionary),
        _ingredient_nouns_from_lines(context_ingredients.splitlines()),
    )
    return EvaluationReport(
        mode=mode,
        bleu=bleu_score,
        brevity_penalty=bp,
        rouge_l_f=rl_f,
        nted=tree_score,
        jaccard_coherence=coherence,
    )

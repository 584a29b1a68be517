"""BM25 retrieval of the most similar corpus recipe for a given context.

Three fields (title, ingredients, instructions) are indexed separately and
scored with BM25 (k1=1.2, b=0.75), then combined with fixed field weights.
The idf uses the +1 variant so it never goes negative, which keeps scores
monotone in matching query terms. Tokenization matches textnorm: lowercase
word tokens, lemmatized, punctuation dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .corpus import RecipeRecord
from .textnorm import lemmatize, word_tokenize

__all__ = [
    "InvertedIndex",
    "ScoredHit",
    "RetrievalError",
    "DuplicateId",
    "EmptyQuery",
    "build_index",
    "search",
    "FIELDS",
    "FIELD_WEIGHTS",
]

FIELDS = ("title", "ingredients", "instructions")
FIELD_WEIGHTS = {"title": 2.0, "ingredients": 1.5, "instructions": 1.0}
BM25_K1 = 1.2
BM25_B = 0.75


class RetrievalError(Exception):
    pass


class DuplicateId(RetrievalError):
    pass


class EmptyQuery(RetrievalError):
    pass


def index_tokens(text: str) -> list[str]:
    return [lemmatize(t) for t in word_tokenize(text).tokens if any(c.isalnum() for c in t)]


@dataclass
class _FieldIndex:
    postings: dict[str, list[tuple[int, int]]] = field(default_factory=dict)
    doc_len: list[int] = field(default_factory=list)
    avg_len: float = 0.0


@dataclass
class InvertedIndex:
    doc_ids: list[str]
    fields: dict[str, _FieldIndex]

    @property
    def doc_count(self) -> int:
        return len(self.doc_ids)


def _field_text(record: RecipeRecord, fieldname: str) -> str:
    if fieldname == "title":
        return record.title
    if fieldname == "ingredients":
        return "\n".join(l.name_phrase for l in record.ingredients)
    return " ".join(record.steps)


def build_index(records: Sequence[RecipeRecord]) -> InvertedIndex:
    """Deterministic per-field index; duplicate recipe ids are rejected."""
    doc_ids: list[str] = []
    seen: set[str] = set()
    for r in records:
        if r.id in seen:
            raise DuplicateId(f"recipe id {r.id!r} appears more than once")
        seen.add(r.id)
        doc_ids.append(r.id)

    fields: dict[str, _FieldIndex] = {}
    for fieldname in FIELDS:
        fi = _FieldIndex()
        for doc_idx, record in enumerate(records):
            tokens = index_tokens(_field_text(record, fieldname))
            fi.doc_len.append(len(tokens))
            counts: dict[str, int] = {}
            for t in tokens:
                counts[t] = counts.get(t, 0) + 1
            for term, tf in counts.items():
                fi.postings.setdefault(term, []).append((doc_idx, tf))
        fi.avg_len = (sum(fi.doc_len) / len(fi.doc_len)) if fi.doc_len else 0.0
        fields[fieldname] = fi
    return InvertedIndex(doc_ids=doc_ids, fields=fields)


@dataclass(frozen=True)
class ScoredHit:
    recipe_id: str
    score: float
    breakdown: dict[str, float]


def _bm25_field(fi: _FieldIndex, terms: Sequence[str], n_docs: int) -> dict[int, float]:
    scores: dict[int, float] = {}
    if not terms or n_docs == 0 or fi.avg_len == 0:
        return scores
    for term in terms:
        postings = fi.postings.get(term)
        if not postings:
            continue
        df = len(postings)
        idf = math.log((n_docs - df + 0.5) / (df + 0.5) + 1.0)
        for doc_idx, tf in postings:
            dl = fi.doc_len[doc_idx]
            denom = tf + BM25_K1 * (1.0 - BM25_B + BM25_B * dl / fi.avg_len)
            scores[doc_idx] = scores.get(doc_idx, 0.0) + idf * tf * (BM25_K1 + 1.0) / denom
    return scores


def search(
    index: InvertedIndex,
    query: Mapping[str, Optional[str]],
    top_n: int = 10,
) -> list[ScoredHit]:
    """Weighted BM25 over the query's non-empty fields.

    Results sort by descending score with ties broken by ascending recipe id;
    only documents matching at least one term are returned.
    """
    field_terms = {
        f: index_tokens(text)
        for f, text in query.items()
        if f in FIELDS and text and text.strip()
    }
    if not any(field_terms.values()):
        raise EmptyQuery("query needs at least one non-empty field")

    combined: dict[int, float] = {}
    breakdowns: dict[int, dict[str, float]] = {}
    for fieldname, terms in field_terms.items():
        weight = FIELD_WEIGHTS[fieldname]
        for doc_idx, s in _bm25_field(index.fields[fieldname], terms, index.doc_count).items():
            combined[doc_idx] = combined.get(doc_idx, 0.0) + weight * s
            breakdowns.setdefault(doc_idx, {})[fieldname] = weight * s

    ranked = sorted(combined.items(), key=lambda kv: (-kv[1], index.doc_ids[kv[0]]))
    return [
        ScoredHit(recipe_id=index.doc_ids[i], score=s, breakdown=breakdowns[i])
        for i, s in ranked[:top_n]
    ]

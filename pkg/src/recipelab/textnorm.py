"""Tokenization, rule-based lemmatization, root-noun extraction, the
ingredient dictionary, and ingredient-overlap highlighting.

Root nouns are the unit of analysis everywhere downstream: "shredded
provolone cheese" counts as "cheese" for F1, highlighting, and coherence,
because recipe authors freely vary the full phrase.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from typing import TYPE_CHECKING, Iterable, Literal

if TYPE_CHECKING:
    from .corpus import IngredientLine

__all__ = [
    "TokenStream",
    "Lemmatizer",
    "IngredientDictionary",
    "HighlightSpan",
    "EmptyPhrase",
    "word_tokenize",
    "lemmatize",
    "root_noun_of_phrase",
    "extract_ingredient_nouns",
    "overlap_highlights",
    "DESCRIPTOR_WORDS",
]

RootNounSet = frozenset[str]


class EmptyPhrase(ValueError):
    """Raised when a phrase contains no alphabetic token to take a head from."""


# Words, digit runs (decimals kept whole), or single punctuation marks.
_TOKEN_RE = re.compile(r"[A-Za-z]+|\d+(?:\.\d+)*|[^\sA-Za-z\d]")


@dataclass(frozen=True)
class TokenStream:
    """Lowercase tokens plus (start, end) character offsets into the source."""

    tokens: tuple[str, ...]
    spans: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)


def word_tokenize(text: str) -> TokenStream:
    """Split on whitespace and punctuation boundaries, lowercasing tokens.

    Punctuation marks come out as their own tokens and decimals like "1.5"
    stay whole. Offsets always slice the original, un-lowercased text.
    """
    tokens: list[str] = []
    spans: list[tuple[int, int]] = []
    for m in _TOKEN_RE.finditer(text):
        tokens.append(m.group(0).lower())
        spans.append((m.start(), m.end()))
    return TokenStream(tokens=tuple(tokens), spans=tuple(spans))


# Culinary irregular plurals and words the suffix rules would mangle.
_LEMMA_EXCEPTIONS: dict[str, str] = {
    "molasses": "molasses",
    "hummus": "hummus",
    "couscous": "couscous",
    "asparagus": "asparagus",
    "swiss": "swiss",
    "chives": "chive",
    "olives": "olive",
    "cloves": "clove",
    "grapes": "grape",
    "limes": "lime",
    "dates": "date",
    "prunes": "prune",
    "noodles": "noodle",
    "anchovies": "anchovy",
    "sprinkles": "sprinkle",
    "lentils": "lentil",
    "oats": "oat",
    "greens": "green",
    "leaves": "leaf",
}

# (suffix, replacement, required stem endings or () for none, minimum stem length)
_SUFFIX_RULES: tuple[tuple[str, str, tuple[str, ...], int], ...] = (
    ("ies", "y", (), 2),
    ("ves", "f", (), 2),
    ("es", "", ("s", "x", "z", "ch", "sh", "o"), 2),
    ("s", "", (), 3),
)

_NO_STRIP_ENDINGS = ("ss", "us", "is")


@dataclass(frozen=True)
class Lemmatizer:
    """Exception map consulted first, then ordered suffix-stripping rules.

    Idempotent by construction on the bundled corpus vocabulary; irregular
    words that would re-trigger a rule live in the exception map.
    """

    exceptions: dict[str, str] = field(default_factory=lambda: dict(_LEMMA_EXCEPTIONS))
    suffix_rules: tuple[tuple[str, str, tuple[str, ...], int], ...] = _SUFFIX_RULES

    def lemmatize(self, word: str) -> str:
        if word in self.exceptions:
            return self.exceptions[word]
        if word.endswith(_NO_STRIP_ENDINGS):
            return word
        for suffix, replacement, stem_ends, min_stem in self.suffix_rules:
            if not word.endswith(suffix):
                continue
            stem = word[: -len(suffix)]
            if len(stem) < min_stem:
                continue
            if stem_ends and not stem.endswith(stem_ends):
                continue
            return stem + replacement
        return word


_DEFAULT_LEMMATIZER = Lemmatizer()


def lemmatize(word: str) -> str:
    """Lemmatize a single lowercase word with the default rule set."""
    return _DEFAULT_LEMMATIZER.lemmatize(word)


# Preparation and descriptor words skipped when picking the head of an
# ingredient phrase. Extend in code; the dictionary file covers nouns only.
DESCRIPTOR_WORDS = frozenset(
    """
    fresh freshly chopped shredded ground grated minced sliced diced melted
    softened crushed dried beaten whipped sifted toasted roasted cooked raw
    large small medium extra divided optional needed taste boneless skinless
    lean ripe frozen canned packed unsalted salted sweetened unsweetened
    light dark heavy thin thick fine finely coarsely thinly cold warm hot
    baby whole halved quartered peeled seeded trimmed rinsed drained cubed
    julienned crumbled torn lightly firmly loosely plain instant quick
    purpose all self rising low reduced fat free gluten skim mild spicy
    and or of to for the a an with without more about plus
    """.split()
)


class EmptyDictionary(ValueError):
    """Raised when an ingredient dictionary file yields no entries."""


@dataclass(frozen=True)
class IngredientDictionary:
    """Set of lemmatized ingredient root nouns used to filter non-ingredients."""

    root_nouns: frozenset[str]
    source: str = "bundled"

    def __contains__(self, word: str) -> bool:
        return word in self.root_nouns

    def __len__(self) -> int:
        return len(self.root_nouns)

    @classmethod
    def from_lines(
        cls, lines: Iterable[str], source: str = "inline", lemmatizer: Lemmatizer | None = None
    ) -> "IngredientDictionary":
        """Build from one-noun-per-line text; '#' starts a comment.

        Entries are lemmatized on load so every stored entry equals its own
        lemma regardless of how the file spells it.
        """
        lem = lemmatizer or _DEFAULT_LEMMATIZER
        nouns: set[str] = set()
        for raw in lines:
            entry = raw.split("#", 1)[0].strip().lower()
            if entry:
                nouns.add(lem.lemmatize(entry))
        if not nouns:
            raise EmptyDictionary(f"no ingredient nouns found in {source}")
        return cls(root_nouns=frozenset(nouns), source=source)

    @classmethod
    def from_file(cls, path) -> "IngredientDictionary":
        with open(path, encoding="utf-8") as fh:
            return cls.from_lines(fh, source=str(path))

    @classmethod
    def bundled(cls) -> "IngredientDictionary":
        text = resources.files("recipelab.data").joinpath("ingredient_nouns.txt").read_text("utf-8")
        return cls.from_lines(text.splitlines(), source="bundled:ingredient_nouns.txt")


def root_noun_of_phrase(phrase: str, lemmatizer: Lemmatizer | None = None) -> str:
    """Lemmatized head word of an ingredient phrase.

    The head is the last alphabetic token that is not a descriptor; if every
    token is a descriptor, the last alphabetic token wins anyway.
    """
    lem = lemmatizer or _DEFAULT_LEMMATIZER
    words = [t for t in word_tokenize(phrase).tokens if t.isalpha()]
    if not words:
        raise EmptyPhrase(f"no alphabetic token in {phrase!r}")
    for token in reversed(words):
        if token not in DESCRIPTOR_WORDS:
            return lem.lemmatize(token)
    return lem.lemmatize(words[-1])


def extract_ingredient_nouns(
    text: str, dictionary: IngredientDictionary, lemmatizer: Lemmatizer | None = None
) -> RootNounSet:
    """All dictionary root nouns mentioned anywhere in the text."""
    lem = lemmatizer or _DEFAULT_LEMMATIZER
    found = {
        lemma
        for token in word_tokenize(text).tokens
        if token.isalpha() and (lemma := lem.lemmatize(token)) in dictionary
    }
    return frozenset(found)


@dataclass(frozen=True)
class HighlightSpan:
    """One occurrence of an overlapped ingredient root noun.

    For field "ingredients" the offsets index into the newline-join of the
    original ingredient lines; for "generated_text" they index into the
    generated text passed to :func:`overlap_highlights`.
    """

    field: Literal["ingredients", "generated_text"]
    start: int
    end: int
    root_noun: str


def ingredients_field_text(ingredients: Iterable["IngredientLine"]) -> str:
    """Canonical text the ingredient-side highlight offsets refer to."""
    return "\n".join(line.original for line in ingredients)


def overlap_highlights(
    ingredients: list["IngredientLine"],
    generated: str,
    dictionary: IngredientDictionary,
    lemmatizer: Lemmatizer | None = None,
) -> list[HighlightSpan]:
    """Spans for every root noun shared by the ingredient list and the text.

    The overlap set is {ingredient root nouns} ∩ {dictionary nouns in the
    generated text}; each occurrence in either field becomes one span.
    """
    lem = lemmatizer or _DEFAULT_LEMMATIZER
    ingredient_nouns = frozenset(line.root_noun for line in ingredients)
    overlap = ingredient_nouns & extract_ingredient_nouns(generated, dictionary, lem)
    if not overlap:
        return []

    spans: list[HighlightSpan] = []
    ing_text = ingredients_field_text(ingredients)
    for source, fieldname in ((ing_text, "ingredients"), (generated, "generated_text")):
        stream = word_tokenize(source)
        for token, (start, end) in zip(stream.tokens, stream.spans):
            if token.isalpha() and lem.lemmatize(token) in overlap:
                spans.append(
                    HighlightSpan(
                        field=fieldname,  # type: ignore[arg-type]
                        start=start,
                        end=end,
                        root_noun=lem.lemmatize(token),
                    )
                )
    return spans

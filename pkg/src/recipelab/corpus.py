"""Corpus ingestion, ingredient-line parsing, quality filtering, and splits.

Raw recipes arrive as line-delimited JSON objects with fields
{id, title, ingredients: [text], instructions: text}. Parsing strips
quantities, units, and comments from ingredient lines; filtering keeps
recipes with at least 2 ingredients, 2 instruction sentences, and 20
instruction words and drops recipes carrying non-recipe boilerplate.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Union

from .textnorm import root_noun_of_phrase

__all__ = [
    "RawRecipe",
    "IngredientLine",
    "RecipeRecord",
    "RejectedRecipe",
    "CorpusSplit",
    "CorpusError",
    "MalformedRecord",
    "InsufficientCorpus",
    "EmptyAfterStripping",
    "parse_ingredient_line",
    "split_sentences",
    "filter_recipe",
    "split_corpus",
    "ingest",
    "load_filtered_corpus",
    "save_records",
    "load_records",
    "save_split",
    "load_split",
    "UNIT_WORDS",
]


class CorpusError(Exception):
    pass


class MalformedRecord(CorpusError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class InsufficientCorpus(CorpusError):
    pass


class EmptyAfterStripping(CorpusError):
    """The ingredient line was nothing but quantity, unit, or comment."""


@dataclass(frozen=True)
class RawRecipe:
    source_id: str
    title: str
    ingredient_lines: list[str]
    instruction_text: str


@dataclass(frozen=True)
class IngredientLine:
    original: str
    name_phrase: str
    quantity: Fraction | None
    unit: str | None
    root_noun: str


@dataclass(frozen=True)
class RecipeRecord:
    id: str
    title: str
    ingredients: list[IngredientLine]
    steps: list[str]


@dataclass(frozen=True)
class RejectedRecipe:
    source_id: str
    reason: str


@dataclass(frozen=True)
class CorpusSplit:
    train: list[str]
    validation: list[str]
    test: list[str]
    seed: int


# Unit lexicon; plural forms are generated. Matching is quantity-gated so
# ingredient names that happen to be unit words ("cloves") survive alone.
_UNIT_SINGULARS = (
    "cup", "tablespoon", "tbsp", "teaspoon", "tsp", "ounce", "oz", "pound",
    "lb", "gram", "g", "kg", "ml", "l", "liter", "litre", "quart", "pint",
    "gallon", "pinch", "dash", "clove", "slice", "can", "package", "pkg",
    "stick", "bunch", "head", "jar", "box", "bag", "sprig", "stalk", "piece",
)
UNIT_WORDS = frozenset(_UNIT_SINGULARS) | frozenset(u + "s" for u in _UNIT_SINGULARS)

_UNICODE_FRACTIONS = {
    "¼": Fraction(1, 4), "½": Fraction(1, 2), "¾": Fraction(3, 4),
    "⅓": Fraction(1, 3), "⅔": Fraction(2, 3), "⅕": Fraction(1, 5),
    "⅖": Fraction(2, 5), "⅗": Fraction(3, 5), "⅘": Fraction(4, 5),
    "⅙": Fraction(1, 6), "⅚": Fraction(5, 6), "⅛": Fraction(1, 8),
    "⅜": Fraction(3, 8), "⅝": Fraction(5, 8), "⅞": Fraction(7, 8),
}
_FRACTION_CHARS = "".join(_UNICODE_FRACTIONS)

_PAREN_RE = re.compile(r"\([^)]*\)")
# Ordered: mixed number, range, fraction, decimal, integer (each with an
# optional trailing unicode fraction on the integer forms).
_QUANTITY_RE = re.compile(
    rf"""^\s*(?:
        (?P<mixed>\d+\s+\d+\s*/\s*\d+)
      | (?P<range>\d+(?:\.\d+)?\s*(?:-|–|—|\bto\b)\s*\d+(?:\.\d+)?)
      | (?P<frac>\d+\s*/\s*\d+)
      | (?P<dec>\d+\.\d+)
      | (?P<intfrac>\d+\s*[{_FRACTION_CHARS}])
      | (?P<int>\d+)
      | (?P<unifrac>[{_FRACTION_CHARS}])
    )\s*""",
    re.VERBOSE,
)
_UNIT_RE = re.compile(r"^([A-Za-z]+)\.?(?:\s+of\b)?\s*")
_WS_RE = re.compile(r"\s+")


def _parse_quantity(text: str) -> tuple[Fraction | None, str]:
    m = _QUANTITY_RE.match(text)
    if not m:
        return None, text
    rest = text[m.end():]
    if m.group("mixed"):
        whole, frac = m.group("mixed").split(None, 1)
        num, den = frac.split("/")
        value = Fraction(int(whole)) + Fraction(int(num), int(den))
    elif m.group("range"):
        lo, hi = re.split(r"\s*(?:-|–|—|\bto\b)\s*", m.group("range"))
        value = (Fraction(lo) + Fraction(hi)) / 2
    elif m.group("frac"):
        num, den = m.group("frac").split("/")
        value = Fraction(int(num), int(den))
    elif m.group("dec"):
        value = Fraction(m.group("dec"))
    elif m.group("intfrac"):
        value = Fraction(int(m.group("intfrac")[:-1])) + _UNICODE_FRACTIONS[m.group("intfrac")[-1]]
    elif m.group("int"):
        value = Fraction(int(m.group("int")))
    else:
        value = _UNICODE_FRACTIONS[m.group("unifrac")]
    return value, rest


def parse_ingredient_line(line: str) -> IngredientLine:
    """Strip quantity, unit, and comments; keep the descriptive name phrase.

    Comments are anything parenthesized or after the first comma. The unit is
    only recognized immediately after a quantity, from the bundled lexicon.
    Raises EmptyAfterStripping when nothing but quantity/comment remains.
    """
    if not line.strip():
        raise EmptyAfterStripping("blank ingredient line")
    working = _PAREN_RE.sub(" ", line)
    working = working.split(",", 1)[0]

    quantity, working = _parse_quantity(working)
    unit = None
    if quantity is not None:
        m = _UNIT_RE.match(working)
        if m and m.group(1).lower() in UNIT_WORDS:
            unit = m.group(1)
            working = working[m.end():]

    name_phrase = _WS_RE.sub(" ", working).strip(" -–—.;:")
    if not any(c.isalpha() for c in name_phrase):
        raise EmptyAfterStripping(f"nothing left of {line!r} after stripping")
    return IngredientLine(
        original=line,
        name_phrase=name_phrase,
        quantity=quantity,
        unit=unit,
        root_noun=root_noun_of_phrase(name_phrase),
    )


# Abbreviations that a trailing period must not split after.
_ABBREVIATIONS = frozenset(
    "e.g i.e etc vs approx oz tbsp tsp lb pkg min hr no mr mrs dr st".split()
)
_SENTENCE_END_RE = re.compile(r"([.!?]+)(\s+)")


def split_sentences(instruction_text: str) -> list[str]:
    """Split instruction text on sentence terminators followed by whitespace.

    Decimals never split (no whitespace follows the dot) and a short
    abbreviation list guards "approx. 5 min" style periods. Terminators stay
    attached to their sentence; empty pieces are dropped.
    """
    if not instruction_text.strip():
        return []
    sentences: list[str] = []
    start = 0
    for m in _SENTENCE_END_RE.finditer(instruction_text):
        if m.group(1).startswith("."):
            words = instruction_text[start : m.start()].split()
            last = words[-1].lower().rstrip(".") if words else ""
            if last in _ABBREVIATIONS:
                continue
        piece = instruction_text[start : m.end(1)].strip()
        if piece:
            sentences.append(piece)
        start = m.end()
    tail = instruction_text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


# Boilerplate markers for non-recipe content (nutrition blocks, attribution).
_DENYLIST = ("nutrition", "calories", "submitted by", "recipe by")

_MIN_INGREDIENTS = 2
_MIN_SENTENCES = 2
_MIN_WORDS = 20


def filter_recipe(raw: RawRecipe) -> Union[RecipeRecord, RejectedRecipe]:
    """Accept a raw recipe or reject it with the first failed rule."""
    haystack = (raw.title + " " + raw.instruction_text + " " + " ".join(raw.ingredient_lines)).lower()
    for marker in _DENYLIST:
        if marker in haystack:
            return RejectedRecipe(raw.source_id, f"denylisted content: {marker!r}")

    ingredients: list[IngredientLine] = []
    for line in raw.ingredient_lines:
        try:
            ingredients.append(parse_ingredient_line(line))
        except EmptyAfterStripping:
            continue
    if len(ingredients) < _MIN_INGREDIENTS:
        return RejectedRecipe(raw.source_id, "too few ingredients")

    steps = split_sentences(raw.instruction_text)
    if len(steps) < _MIN_SENTENCES:
        return RejectedRecipe(raw.source_id, "too few instruction sentences")

    if len(raw.instruction_text.split()) < _MIN_WORDS:
        return RejectedRecipe(raw.source_id, "too few instruction words")

    return RecipeRecord(
        id=raw.source_id,
        title=raw.title.strip(),
        ingredients=ingredients,
        steps=steps,
    )


def split_corpus(
    records: list[RecipeRecord], seed: int, n_val: int, n_test: int
) -> CorpusSplit:
    """Deterministic shuffle by id, then carve validation/test/train slices.

    Sorting before shuffling makes the split depend only on (seed, id set),
    never on input ordering.
    """
    import random

    if n_val + n_test >= len(records):
        raise InsufficientCorpus(
            f"need n_val + n_test < {len(records)} records, got {n_val} + {n_test}"
        )
    ids = sorted(r.id for r in records)
    random.Random(seed).shuffle(ids)
    return CorpusSplit(
        validation=ids[:n_val],
        test=ids[n_val : n_val + n_test],
        train=ids[n_val + n_test :],
        seed=seed,
    )


def ingest(path, format: str = "jsonl") -> list[RawRecipe]:
    """Read one RawRecipe per line; malformed lines raise with their number."""
    if format != "jsonl":
        raise ValueError(f"unsupported corpus format {format!r}")
    records: list[RawRecipe] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(line_no, f"invalid JSON: {exc}") from exc
            records.append(_raw_from_obj(obj, line_no))
    return records


def _raw_from_obj(obj, line_no: int) -> RawRecipe:
    if not isinstance(obj, dict):
        raise MalformedRecord(line_no, "record is not an object")
    for key, kind in (("id", str), ("title", str), ("ingredients", list), ("instructions", str)):
        if key not in obj:
            raise MalformedRecord(line_no, f"missing field {key!r}")
        if not isinstance(obj[key], kind):
            raise MalformedRecord(line_no, f"field {key!r} must be {kind.__name__}")
    if not obj["title"].strip():
        raise MalformedRecord(line_no, "title is empty")
    if not all(isinstance(x, str) for x in obj["ingredients"]):
        raise MalformedRecord(line_no, "ingredients must be a list of strings")
    return RawRecipe(
        source_id=obj["id"],
        title=obj["title"],
        ingredient_lines=list(obj["ingredients"]),
        instruction_text=obj["instructions"],
    )


def load_filtered_corpus(path) -> tuple[list[RecipeRecord], list[RejectedRecipe]]:
    """Ingest + filter in one pass; rejects come back with reasons."""
    accepted: list[RecipeRecord] = []
    rejected: list[RejectedRecipe] = []
    for raw in ingest(path):
        result = filter_recipe(raw)
        if isinstance(result, RecipeRecord):
            accepted.append(result)
        else:
            rejected.append(result)
    return accepted, rejected


# ---------------------------------------------------------------------------
# Persistence for prepared corpora and split manifests.

def _line_to_obj(line: IngredientLine) -> dict:
    return {
        "original": line.original,
        "name_phrase": line.name_phrase,
        "quantity": str(line.quantity) if line.quantity is not None else None,
        "unit": line.unit,
        "root_noun": line.root_noun,
    }


def _line_from_obj(obj: dict) -> IngredientLine:
    return IngredientLine(
        original=obj["original"],
        name_phrase=obj["name_phrase"],
        quantity=Fraction(obj["quantity"]) if obj["quantity"] is not None else None,
        unit=obj["unit"],
        root_noun=obj["root_noun"],
    )


def save_records(records: Iterable[RecipeRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps({
                "id": r.id,
                "title": r.title,
                "ingredients": [_line_to_obj(l) for l in r.ingredients],
                "steps": r.steps,
            }, ensure_ascii=False) + "\n")


def load_records(path) -> list[RecipeRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            records.append(RecipeRecord(
                id=obj["id"],
                title=obj["title"],
                ingredients=[_line_from_obj(o) for o in obj["ingredients"]],
                steps=list(obj["steps"]),
            ))
    return records


def save_split(split: CorpusSplit, path) -> None:
    Path(path).write_text(json.dumps({
        "seed": split.seed,
        "train": split.train,
        "validation": split.validation,
        "test": split.test,
    }, indent=2), encoding="utf-8")


def load_split(path) -> CorpusSplit:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    return CorpusSplit(
        train=list(obj["train"]),
        validation=list(obj["validation"]),
        test=list(obj["test"]),
        seed=int(obj["seed"]),
    )

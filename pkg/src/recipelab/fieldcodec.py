"""Byte-pair encoding and the multi-field recipe serialization scheme.

A recipe's three fields (title, ingredients, instructions) are each wrapped
in field-specific start/end tokens so any subset can condition generation of
another. Training examples shuffle field order and ingredient order, clip or
pad to a fixed window, and prompts end with the start token of the field to
generate. Special-token surfaces occurring inside user text are escaped, so
arbitrary input can never inject a delimiter.
"""

from __future__ import annotations

import hashlib
import random
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping

__all__ = [
    "FieldKind",
    "BpeVocab",
    "EncodedRecipe",
    "CodecError",
    "EmptyCorpus",
    "UnknownId",
    "TargetInContext",
    "EmptyContext",
    "MalformedSerialization",
    "train_bpe",
    "serialize_multifield",
    "parse_serialized",
    "make_training_example",
    "build_prompt",
    "escape_specials",
    "unescape_specials",
    "PAD_SURFACE",
]


class CodecError(Exception):
    pass


class EmptyCorpus(CodecError):
    pass


class UnknownId(CodecError):
    pass


class TargetInContext(CodecError):
    pass


class EmptyContext(CodecError):
    pass


class MalformedSerialization(CodecError):
    pass


class FieldKind(Enum):
    TITLE = "title"
    INGREDIENTS = "ingredients"
    INSTRUCTIONS = "instructions"


_FIELD_SHORT = {
    FieldKind.TITLE: "title",
    FieldKind.INGREDIENTS: "ingr",
    FieldKind.INSTRUCTIONS: "instr",
}
CANONICAL_ORDER = (FieldKind.TITLE, FieldKind.INGREDIENTS, FieldKind.INSTRUCTIONS)

PAD_SURFACE = "$"


def start_surface(kind: FieldKind) -> str:
    return f"<start-{_FIELD_SHORT[kind]}>"


def end_surface(kind: FieldKind) -> str:
    return f"<end-{_FIELD_SHORT[kind]}>"


# Delimiter surfaces in registration order; pad is last. The pad surface is
# deliberately excluded from text-level matching: a "$" in user text is just
# a dollar sign, pad ids are only ever appended programmatically.
_DELIMITER_SURFACES = tuple(
    surf for kind in CANONICAL_ORDER for surf in (start_surface(kind), end_surface(kind))
)
_SPECIAL_SURFACES = _DELIMITER_SURFACES + (PAD_SURFACE,)

_DELIM_RE = re.compile("|".join(re.escape(s) for s in _DELIMITER_SURFACES))
_ESCAPED_RE = re.compile("|".join("<\\\\" + re.escape(s[1:]) for s in _DELIMITER_SURFACES))


def escape_specials(text: str) -> str:
    """Make delimiter surfaces in user text inert (reversible)."""
    text = text.replace("<\\", "<\\\\")
    return _DELIM_RE.sub(lambda m: "<\\" + m.group(0)[1:], text)


def unescape_specials(text: str) -> str:
    text = _ESCAPED_RE.sub(lambda m: "<" + m.group(0)[2:], text)
    return text.replace("<\\\\", "<\\")


# GPT-2-style pre-tokenizer: an optional leading space glues to the word so
# merges never cross word boundaries. Concatenating matches restores the text.
_PRETOKEN_RE = re.compile(r" ?[A-Za-z]+| ?\d+| ?[^\sA-Za-z\d]+|\s+")


@dataclass
class BpeVocab:
    """Byte-level BPE vocabulary with 7 reserved special tokens on top.

    Ids 0..255 are the byte alphabet, merges follow, and the six field
    delimiters plus the pad token occupy the top of the id space.
    """

    merges: list[tuple[bytes, bytes]]
    token_to_id: dict[bytes, int]
    id_to_token: dict[int, bytes]
    special_to_id: dict[str, int]
    _ranks: dict[tuple[bytes, bytes], int] = field(default_factory=dict, repr=False)
    _encode_cache: dict[str, tuple[int, ...]] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._ranks:
            self._ranks = {pair: i for i, pair in enumerate(self.merges)}

    @property
    def vocab_size(self) -> int:
        return len(self.token_to_id) + len(self.special_to_id)

    @property
    def n_bpe_tokens(self) -> int:
        return len(self.token_to_id)

    @property
    def pad_id(self) -> int:
        return self.special_to_id[PAD_SURFACE]

    def start_id(self, kind: FieldKind) -> int:
        return self.special_to_id[start_surface(kind)]

    def end_id(self, kind: FieldKind) -> int:
        return self.special_to_id[end_surface(kind)]

    def _bpe(self, token: bytes) -> list[bytes]:
        parts = [token[i : i + 1] for i in range(len(token))]
        while len(parts) >= 2:
            best = None
            best_rank = None
            for pair in zip(parts, parts[1:]):
                rank = self._ranks.get(pair)
                if rank is not None and (best_rank is None or rank < best_rank):
                    best, best_rank = pair, rank
            if best is None:
                break
            merged: list[bytes] = []
            i = 0
            while i < len(parts):
                if i < len(parts) - 1 and (parts[i], parts[i + 1]) == best:
                    merged.append(parts[i] + parts[i + 1])
                    i += 2
                else:
                    merged.append(parts[i])
                    i += 1
            parts = merged
        return parts

    def encode(self, text: str) -> list[int]:
        """Byte-level BPE encode; never produces special-token ids."""
        ids: list[int] = []
        for m in _PRETOKEN_RE.finditer(text):
            word = m.group(0)
            cached = self._encode_cache.get(word)
            if cached is None:
                cached = tuple(self.token_to_id[p] for p in self._bpe(word.encode("utf-8")))
                if len(self._encode_cache) < 65536:
                    self._encode_cache[word] = cached
            ids.extend(cached)
        return ids

    def decode(self, ids: Iterable[int]) -> str:
        """Inverse of encode; special ids render as their surfaces."""
        specials = {i: s for s, i in self.special_to_id.items()}
        chunks: list[bytes] = []
        for i in ids:
            if i in specials:
                chunks.append(specials[i].encode("utf-8"))
            elif i in self.id_to_token:
                chunks.append(self.id_to_token[i])
            else:
                raise UnknownId(f"id {i} not in vocabulary of size {self.vocab_size}")
        return b"".join(chunks).decode("utf-8", errors="replace")

    def encode_serialized(self, text: str) -> list[int]:
        """Encode multi-field text, mapping delimiter surfaces to their ids.

        Only safe on serializer output: user content inside it has been
        escaped, so every surface match really is a delimiter.
        """
        ids: list[int] = []
        pos = 0
        for m in _DELIM_RE.finditer(text):
            if m.start() > pos:
                ids.extend(self.encode(text[pos : m.start()]))
            ids.append(self.special_to_id[m.group(0)])
            pos = m.end()
        if pos < len(text):
            ids.extend(self.encode(text[pos:]))
        return ids

    # -- persistence ------------------------------------------------------

    def dumps(self) -> str:
        lines = ["recipelab-vocab v1", "alphabet bytes 0..255", f"merges {len(self.merges)}"]
        for left, right in self.merges:
            lines.append(f"{self.token_to_id[left]} {self.token_to_id[right]}")
        lines.append(f"specials {len(self.special_to_id)}")
        for surface, sid in sorted(self.special_to_id.items(), key=lambda kv: kv[1]):
            lines.append(f"{sid} {surface}")
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def loads(cls, text: str) -> "BpeVocab":
        lines = text.splitlines()
        if len(lines) < 2 or lines[0] != "recipelab-vocab v1" or not lines[1].startswith("alphabet"):
            raise CodecError("not a recipelab vocabulary file")
        n_merges = int(lines[2].split()[1])
        token_to_id = {bytes([b]): b for b in range(256)}
        id_to_token = {b: bytes([b]) for b in range(256)}
        merges: list[tuple[bytes, bytes]] = []
        for i in range(n_merges):
            left_id, right_id = (int(x) for x in lines[3 + i].split())
            left, right = id_to_token[left_id], id_to_token[right_id]
            merges.append((left, right))
            new_id = 256 + i
            token_to_id[left + right] = new_id
            id_to_token[new_id] = left + right
        spec_line = 3 + n_merges
        n_specials = int(lines[spec_line].split()[1])
        special_to_id: dict[str, int] = {}
        for i in range(n_specials):
            sid_str, surface = lines[spec_line + 1 + i].split(" ", 1)
            special_to_id[surface] = int(sid_str)
        return cls(merges=merges, token_to_id=token_to_id,
                   id_to_token=id_to_token, special_to_id=special_to_id)

    @classmethod
    def load(cls, path) -> "BpeVocab":
        return cls.loads(Path(path).read_text(encoding="utf-8"))

    def content_hash(self) -> str:
        return hashlib.sha256(self.dumps().encode("utf-8")).hexdigest()


def train_bpe(texts: Iterable[str], merge_count: int) -> BpeVocab:
    """Learn merges by descending pair frequency, ties broken lexicographically.

    Byte-level fallback guarantees any UTF-8 text stays encodable; merging
    stops early once no pair occurs twice. Identical corpus and merge_count
    always produce the identical merge list.
    """
    word_freq: dict[bytes, int] = {}
    for text in texts:
        for m in _PRETOKEN_RE.finditer(text):
            w = m.group(0).encode("utf-8")
            word_freq[w] = word_freq.get(w, 0) + 1
    if not word_freq:
        raise EmptyCorpus("cannot train BPE on an empty corpus")
    if merge_count < 0:
        raise ValueError("merge_count must be >= 0")

    words: list[list[bytes]] = []
    freqs: list[int] = []
    for w, f in word_freq.items():
        words.append([w[i : i + 1] for i in range(len(w))])
        freqs.append(f)

    # Pair counts plus an index of which words contain each pair, updated
    # incrementally so each merge only revisits affected words.
    counts: dict[tuple[bytes, bytes], int] = {}
    where: dict[tuple[bytes, bytes], set[int]] = {}
    for wi, parts in enumerate(words):
        f = freqs[wi]
        for pair in zip(parts, parts[1:]):
            counts[pair] = counts.get(pair, 0) + f
            where.setdefault(pair, set()).add(wi)

    token_to_id = {bytes([b]): b for b in range(256)}
    id_to_token = {b: bytes([b]) for b in range(256)}
    merges: list[tuple[bytes, bytes]] = []

    for _ in range(merge_count):
        if not counts:
            break
        pair, best_count = min(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        if best_count < 2:
            break
        merged_token = pair[0] + pair[1]
        new_id = 256 + len(merges)
        merges.append(pair)
        token_to_id[merged_token] = new_id
        id_to_token[new_id] = merged_token

        for wi in sorted(where.pop(pair, ())):
            parts = words[wi]
            f = freqs[wi]
            for p in zip(parts, parts[1:]):
                counts[p] = counts.get(p, 0) - f
                if counts[p] <= 0:
                    del counts[p]
                s = where.get(p)
                if s is not None:
                    s.discard(wi)
                    if not s:
                        where.pop(p, None)
            out: list[bytes] = []
            i = 0
            while i < len(parts):
                if i < len(parts) - 1 and (parts[i], parts[i + 1]) == pair:
                    out.append(merged_token)
                    i += 2
                else:
                    out.append(parts[i])
                    i += 1
            words[wi] = out
            for p in zip(out, out[1:]):
                counts[p] = counts.get(p, 0) + f
                where.setdefault(p, set()).add(wi)

    base = len(token_to_id)
    special_to_id = {s: base + i for i, s in enumerate(_SPECIAL_SURFACES)}
    return BpeVocab(merges=merges, token_to_id=token_to_id,
                    id_to_token=id_to_token, special_to_id=special_to_id)


@dataclass(frozen=True)
class EncodedRecipe:
    """Token ids of one training example, padded or windowed to max_len."""

    ids: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.ids)


def _field_content(record, kind: FieldKind, ingredient_order: Iterable[int] | None = None) -> str:
    if kind is FieldKind.TITLE:
        return record.title
    if kind is FieldKind.INGREDIENTS:
        order = list(ingredient_order) if ingredient_order is not None else range(len(record.ingredients))
        return "\n".join(record.ingredients[i].name_phrase for i in order)
    return " ".join(record.steps)


def serialize_multifield(
    record,
    field_order: tuple[FieldKind, ...] = CANONICAL_ORDER,
    ingredient_order: tuple[int, ...] | None = None,
) -> str:
    """Wrap each field as `<start-f> content <end-f>` in the given order.

    Ingredient lines contribute their cleaned name phrases (quantities were
    stripped at parse time), joined by newlines in the given permutation;
    steps are joined by spaces. Contents are escaped before wrapping.
    """
    if sorted(field_order, key=lambda k: k.value) != sorted(CANONICAL_ORDER, key=lambda k: k.value):
        raise ValueError("field_order must be a permutation of the three fields")
    n = len(record.ingredients)
    if ingredient_order is not None and sorted(ingredient_order) != list(range(n)):
        raise ValueError("ingredient_order must be a permutation of range(len(ingredients))")
    parts = []
    for kind in field_order:
        content = escape_specials(_field_content(record, kind, ingredient_order))
        parts.append(f"{start_surface(kind)} {content} {end_surface(kind)}")
    return "".join(parts)


def parse_serialized(text: str) -> dict[FieldKind, str]:
    """Recover exact field contents from serializer output.

    Returns the raw text per field (unescaped); callers split ingredients on
    newlines or instructions into sentences as needed.
    """
    surface_to_kind = {start_surface(k): k for k in CANONICAL_ORDER}
    end_to_kind = {end_surface(k): k for k in CANONICAL_ORDER}
    fields: dict[FieldKind, str] = {}
    matches = list(_DELIM_RE.finditer(text))
    i = 0
    while i < len(matches):
        open_m = matches[i]
        kind = surface_to_kind.get(open_m.group(0))
        if kind is None:
            raise MalformedSerialization(f"unexpected {open_m.group(0)!r} at {open_m.start()}")
        if i + 1 >= len(matches) or end_to_kind.get(matches[i + 1].group(0)) is not kind:
            raise MalformedSerialization(f"missing end token for {kind.value}")
        close_m = matches[i + 1]
        inner = text[open_m.end() : close_m.start()]
        if inner.startswith(" "):
            inner = inner[1:]
        if inner.endswith(" "):
            inner = inner[:-1]
        fields[kind] = unescape_specials(inner)
        i += 2
    return fields


def make_training_example(record, seed: int, vocab: BpeVocab, max_len: int = 512) -> EncodedRecipe:
    """Shuffled, encoded, windowed-or-padded example for one recipe.

    Field order and ingredient order are drawn uniformly from the seeded rng;
    over-length encodings contribute a random contiguous max_len window,
    short ones get a pad suffix.
    """
    rng = random.Random(seed)
    field_order = list(CANONICAL_ORDER)
    rng.shuffle(field_order)
    ingredient_order = list(range(len(record.ingredients)))
    rng.shuffle(ingredient_order)
    text = serialize_multifield(record, tuple(field_order), tuple(ingredient_order))
    ids = vocab.encode_serialized(text)
    if len(ids) > max_len:
        start = rng.randrange(len(ids) - max_len + 1)
        ids = ids[start : start + max_len]
    else:
        ids = ids + [vocab.pad_id] * (max_len - len(ids))
    return EncodedRecipe(ids=tuple(ids))


def build_prompt(context: Mapping[FieldKind, str], target: FieldKind, vocab: BpeVocab) -> list[int]:
    """Context fields in canonical order, then the target's start token."""
    if not context:
        raise EmptyContext("at least one context field is required")
    if target in context:
        raise TargetInContext(f"target field {target.value!r} present in context")
    ids: list[int] = []
    for kind in CANONICAL_ORDER:
        if kind in context:
            content = escape_specials(context[kind])
            ids.append(vocab.start_id(kind))
            ids.extend(vocab.encode(f" {content} "))
            ids.append(vocab.end_id(kind))
    ids.append(vocab.start_id(target))
    return ids

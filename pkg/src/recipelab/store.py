"""Append-only persistence for saved generations, ratings, and comments.

The log is a sequence of length-prefixed frames: a 4-byte big-endian payload
length, the UTF-8 JSON payload (with a "type" tag of generation | rating |
comment), and a 4-byte CRC32 of the payload. An in-memory index is rebuilt
by replaying the log at startup; a torn or corrupt tail is truncated so the
next append lands on a clean boundary. External tools can read the file with
nothing but struct and json.
"""

from __future__ import annotations

import json
import os
import struct
import threading
import zlib
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

__all__ = [
    "SavedGeneration",
    "Rating",
    "Comment",
    "StoreError",
    "NotFound",
    "OutOfRange",
    "EmptyComment",
    "CommentTooLong",
    "GenerationStore",
    "MAX_COMMENT_LENGTH",
]

MAX_COMMENT_LENGTH = 4000
_HEADER = struct.Struct(">I")


class StoreError(Exception):
    pass


class NotFound(StoreError):
    pass


class OutOfRange(StoreError):
    pass


class EmptyComment(StoreError):
    pass


class CommentTooLong(StoreError):
    pass


@dataclass(frozen=True)
class SavedGeneration:
    id: int
    created_at: str
    mode: str
    context: dict[str, str]
    output: str
    sampling: dict
    report: Optional[dict] = None
    reference_id: Optional[str] = None

    def to_payload(self) -> dict:
        return {
            "type": "generation", "id": self.id, "created_at": self.created_at,
            "mode": self.mode, "context": self.context, "output": self.output,
            "sampling": self.sampling, "report": self.report,
            "reference_id": self.reference_id,
        }

    @classmethod
    def from_payload(cls, obj: dict) -> "SavedGeneration":
        return cls(
            id=obj["id"], created_at=obj["created_at"], mode=obj["mode"],
            context=obj["context"], output=obj["output"], sampling=obj["sampling"],
            report=obj.get("report"), reference_id=obj.get("reference_id"),
        )


@dataclass(frozen=True)
class Rating:
    generation_id: int
    value: int
    created_at: str


@dataclass(frozen=True)
class Comment:
    generation_id: int
    text: str
    created_at: str


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class GenerationStore:
    """Single-writer append-only store; reads serve from the in-memory index."""

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._generations: dict[int, SavedGeneration] = {}
        self._ratings: dict[int, list[Rating]] = {}
        self._comments: dict[int, list[Comment]] = {}
        self._next_id = 1
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._replay()
        self._fh = open(self.path, "ab")

    def _replay(self) -> None:
        if not self.path.exists():
            self.path.touch()
            return
        good_end = 0
        with open(self.path, "rb") as fh:
            data = fh.read()
        pos = 0
        while pos + 4 <= len(data):
            (length,) = _HEADER.unpack_from(data, pos)
            frame_end = pos + 4 + length + 4
            if frame_end > len(data):
                break
            payload = data[pos + 4 : pos + 4 + length]
            (crc,) = _HEADER.unpack_from(data, pos + 4 + length)
            if zlib.crc32(payload) != crc:
                break
            try:
                obj = json.loads(payload.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError):
                break
            self._apply(obj)
            pos = frame_end
            good_end = frame_end
        if good_end < len(data):
            with open(self.path, "r+b") as fh:
                fh.truncate(good_end)

    def _apply(self, obj: dict) -> None:
        kind = obj.get("type")
        if kind == "generation":
            gen = SavedGeneration.from_payload(obj)
            self._generations[gen.id] = gen
            self._next_id = max(self._next_id, gen.id + 1)
        elif kind == "rating":
            self._ratings.setdefault(obj["generation_id"], []).append(
                Rating(obj["generation_id"], obj["value"], obj["created_at"]))
        elif kind == "comment":
            self._comments.setdefault(obj["generation_id"], []).append(
                Comment(obj["generation_id"], obj["text"], obj["created_at"]))

    def _append(self, payload: dict) -> None:
        body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
        frame = _HEADER.pack(len(body)) + body + _HEADER.pack(zlib.crc32(body))
        self._fh.write(frame)
        self._fh.flush()
        os.fsync(self._fh.fileno())

    def close(self) -> None:
        self._fh.close()

    # -- API ---------------------------------------------------------------

    def save_generation(
        self, mode: str, context: dict[str, str], output: str, sampling: dict,
        report: Optional[dict] = None, reference_id: Optional[str] = None,
    ) -> SavedGeneration:
        with self._lock:
            gen = SavedGeneration(
                id=self._next_id, created_at=_now(), mode=mode, context=dict(context),
                output=output, sampling=dict(sampling), report=report,
                reference_id=reference_id,
            )
            self._append(gen.to_payload())
            self._generations[gen.id] = gen
            self._next_id += 1
            return gen

    def get(self, generation_id: int) -> SavedGeneration:
        gen = self._generations.get(generation_id)
        if gen is None:
            raise NotFound(f"generation {generation_id} does not exist")
        return gen

    def ratings(self, generation_id: int) -> list[Rating]:
        self.get(generation_id)
        return list(self._ratings.get(generation_id, []))

    def comments(self, generation_id: int) -> list[Comment]:
        self.get(generation_id)
        return list(self._comments.get(generation_id, []))

    def list(self, page: int = 1, page_size: int = 20) -> tuple[list[SavedGeneration], int]:
        """Newest first; returns (items, total)."""
        if page < 1 or page_size < 1:
            raise OutOfRange("page and page_size must be >= 1")
        ordered = sorted(self._generations.values(), key=lambda g: (g.created_at, g.id), reverse=True)
        start = (page - 1) * page_size
        return ordered[start : start + page_size], len(ordered)

    def add_rating(self, generation_id: int, value: int) -> Rating:
        if not isinstance(value, int) or not 1 <= value <= 5:
            raise OutOfRange(f"rating must be an integer in [1, 5], got {value!r}")
        with self._lock:
            self.get(generation_id)
            rating = Rating(generation_id=generation_id, value=value, created_at=_now())
            self._append({"type": "rating", "generation_id": generation_id,
                          "value": value, "created_at": rating.created_at})
            self._ratings.setdefault(generation_id, []).append(rating)
            return rating

    def add_comment(self, generation_id: int, text: str) -> Comment:
        if not text or not text.strip():
            raise EmptyComment("comment text must be non-empty")
        if len(text) > MAX_COMMENT_LENGTH:
            raise CommentTooLong(f"comment exceeds {MAX_COMMENT_LENGTH} characters")
        with self._lock:
            self.get(generation_id)
            comment = Comment(generation_id=generation_id, text=text, created_at=_now())
            self._append({"type": "comment", "generation_id": generation_id,
                          "text": text, "created_at": comment.created_at})
            self._comments.setdefault(generation_id, []).append(comment)
            return comment

"""REST API over generation, retrieval, highlighting, evaluation, and the
annotation store, guarded by a single static API key.

All bodies are UTF-8 JSON. Every error response carries a machine-readable
code and a human message under an "error" key; stack traces never leak.
Handlers share immutable model/index/vocab state; store writes serialize
through the store's own lock, and each generate request owns its sampling
state, so concurrent requests are safe.
"""

from __future__ import annotations

import asyncio
import os
import time
from dataclasses import dataclass, field
from typing import Literal, Optional

from fastapi import Depends, FastAPI, Header, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field, model_validator

from . import metrics, retrieval, store as store_mod
from .corpus import EmptyAfterStripping, IngredientLine, RecipeRecord, parse_ingredient_line
from .fieldcodec import BpeVocab, FieldKind
from .model import (
    GenerationResult,
    ModelConfig,
    Params,
    SamplingConfig,
    SequenceTooLong,
    generate_field,
)
from .textnorm import IngredientDictionary, overlap_highlights

__all__ = ["AppState", "create_app", "GENERATION_BUDGET", "REQUEST_TIMEOUT_S"]

GENERATION_BUDGET = 384
REQUEST_TIMEOUT_S = 30.0
API_KEY_HEADER = "x-api-key"


@dataclass
class AppState:
    api_key: str
    records: list[RecipeRecord] = field(default_factory=list)
    index: Optional[retrieval.InvertedIndex] = None
    vocab: Optional[BpeVocab] = None
    params: Optional[Params] = None
    config: Optional[ModelConfig] = None
    dictionary: Optional[IngredientDictionary] = None
    verbs: frozenset = frozenset()
    store: Optional[store_mod.GenerationStore] = None
    vocab_hash: str = ""

    def __post_init__(self):
        self.by_id = {r.id: r for r in self.records}
        if self.index is None and self.records:
            self.index = retrieval.build_index(self.records)
        if self.dictionary is None:
            self.dictionary = IngredientDictionary.bundled()
        if not self.verbs:
            self.verbs = metrics.load_verb_lexicon()
        if self.vocab is not None and not self.vocab_hash:
            self.vocab_hash = self.vocab.content_hash()

    @property
    def model_loaded(self) -> bool:
        return self.params is not None and self.config is not None and self.vocab is not None


class GenerateRequest(BaseModel):
    mode: Literal["instructions", "ingredients"]
    title: str = Field(min_length=1)
    ingredients: Optional[list[str]] = None
    instructions: Optional[str] = None
    k: int = Field(default=3, ge=1, le=30)
    seed: Optional[int] = None

    @model_validator(mode="after")
    def _check_fields_match_mode(self):
        if self.mode == "instructions":
            if not self.ingredients:
                raise ValueError("mode 'instructions' requires a non-empty 'ingredients' list")
            if self.instructions is not None:
                raise ValueError("mode 'instructions' must not include an 'instructions' field")
        else:
            if not self.instructions or not self.instructions.strip():
                raise ValueError("mode 'ingredients' requires a non-empty 'instructions' field")
            if self.ingredients is not None:
                raise ValueError("mode 'ingredients' must not include an 'ingredients' field")
        return self


class SaveGenerationRequest(BaseModel):
    mode: Literal["instructions", "ingredients"]
    context: dict[str, str]
    output: str
    sampling: dict
    report: Optional[dict] = None
    reference_id: Optional[str] = None

    @model_validator(mode="after")
    def _check_context_keys(self):
        allowed = {"title", "ingredients", "instructions"}
        unknown = set(self.context) - allowed
        if unknown:
            raise ValueError(f"unknown context fields: {sorted(unknown)}")
        return self


class RatingRequest(BaseModel):
    value: int


class CommentRequest(BaseModel):
    text: str


def _error(status: int, code: str, message: str, detail=None) -> JSONResponse:
    body = {"error": {"code": code, "message": message}}
    if detail is not None:
        body["error"]["detail"] = detail
    return JSONResponse(status_code=status, content=body)


def _recipe_json(r: RecipeRecord) -> dict:
    return {
        "id": r.id,
        "title": r.title,
        "ingredients": [l.original for l in r.ingredients],
        "ingredient_names": [l.name_phrase for l in r.ingredients],
        "steps": r.steps,
    }


def _generation_json(g: store_mod.SavedGeneration) -> dict:
    return {
        "id": g.id, "created_at": g.created_at, "mode": g.mode, "context": g.context,
        "output": g.output, "sampling": g.sampling, "report": g.report,
        "reference_id": g.reference_id,
    }


def _parse_lines(lines: list[str]) -> list[IngredientLine]:
    parsed = []
    for line in lines:
        try:
            parsed.append(parse_ingredient_line(line))
        except EmptyAfterStripping:
            continue
    return parsed


def create_app(state: AppState) -> FastAPI:
    app = FastAPI(title="recipelab", version="0.1.0", docs_url=None, redoc_url=None)

    class _Unauthorized(Exception):
        pass

    def require_key(x_api_key: Optional[str] = Header(default=None, alias=API_KEY_HEADER)):
        if x_api_key != state.api_key:
            raise _Unauthorized()

    @app.exception_handler(_Unauthorized)
    async def _unauthorized_handler(request: Request, exc):
        return _error(401, "unauthorized", "missing or invalid API key")

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc: RequestValidationError):
        detail = [
            {"loc": [str(p) for p in e.get("loc", [])], "msg": e.get("msg", "")}
            for e in exc.errors()
        ]
        return _error(422, "invalid_request", "request failed validation", detail)

    @app.exception_handler(store_mod.NotFound)
    async def _not_found_handler(request: Request, exc):
        return _error(404, "not_found", str(exc))

    @app.exception_handler(store_mod.OutOfRange)
    async def _range_handler(request: Request, exc):
        return _error(422, "out_of_range", str(exc))

    @app.exception_handler(store_mod.EmptyComment)
    async def _empty_comment_handler(request: Request, exc):
        return _error(422, "empty_comment", str(exc))

    @app.exception_handler(store_mod.CommentTooLong)
    async def _long_comment_handler(request: Request, exc):
        return _error(422, "comment_too_long", str(exc))

    @app.exception_handler(retrieval.EmptyQuery)
    async def _empty_query_handler(request: Request, exc):
        return _error(422, "empty_query", str(exc))

    @app.exception_handler(SequenceTooLong)
    async def _too_long_handler(request: Request, exc):
        return _error(422, "context_too_long", str(exc))

    @app.exception_handler(Exception)
    async def _internal_handler(request: Request, exc):
        return _error(500, "internal", "internal server error")

    @app.get("/v1/health")
    async def health():
        return {
            "status": "ok",
            "model_loaded": state.model_loaded,
            "corpus_size": len(state.records),
            "vocab_hash": state.vocab_hash,
        }

    def _reference_for(query: dict[str, Optional[str]]):
        if state.index is None or not state.records:
            return None
        hits = retrieval.search(state.index, query, top_n=1)
        return hits[0] if hits else None

    def _run_generate(req: GenerateRequest) -> dict:
        t0 = time.perf_counter()
        seed = req.seed if req.seed is not None else int.from_bytes(os.urandom(4), "big")
        cfg = SamplingConfig(k=req.k, max_new_tokens=GENERATION_BUDGET, seed=seed)

        if req.mode == "instructions":
            context = {
                FieldKind.TITLE: req.title,
                FieldKind.INGREDIENTS: "\n".join(req.ingredients),
            }
            target = FieldKind.INSTRUCTIONS
        else:
            context = {
                FieldKind.TITLE: req.title,
                FieldKind.INSTRUCTIONS: req.instructions,
            }
            target = FieldKind.INGREDIENTS

        result: GenerationResult = generate_field(
            state.params, state.config, state.vocab, context, target, cfg
        )

        if req.mode == "instructions":
            ingredient_lines = _parse_lines(req.ingredients)
            instruction_text = result.text
            query = {"title": req.title, "ingredients": "\n".join(req.ingredients)}
        else:
            ingredient_lines = _parse_lines(result.text.splitlines())
            instruction_text = req.instructions
            query = {"title": req.title, "instructions": req.instructions}
        highlights = overlap_highlights(ingredient_lines, instruction_text, state.dictionary)

        hit = _reference_for(query)
        reference = None
        report = None
        if hit is not None:
            ref_record = state.by_id[hit.recipe_id]
            reference = {"recipe": _recipe_json(ref_record), "score": hit.score}
            report = metrics.evaluate(
                result.text, ref_record, context, req.mode,
                dictionary=state.dictionary, verbs=state.verbs,
            ).to_dict()

        return {
            "output": result.text,
            "truncated": result.truncated,
            "highlights": [
                {"field": h.field, "start": h.start, "end": h.end, "root_noun": h.root_noun}
                for h in highlights
            ],
            "reference": reference,
            "report": report,
            "sampling": {"k": req.k, "seed": seed, "max_new_tokens": GENERATION_BUDGET},
            "elapsed_ms": (time.perf_counter() - t0) * 1000.0,
        }

    @app.post("/v1/generate", dependencies=[Depends(require_key)])
    async def generate(req: GenerateRequest):
        if not state.model_loaded:
            return _error(503, "model_not_loaded", "no model checkpoint is loaded")
        try:
            return await asyncio.wait_for(
                asyncio.to_thread(_run_generate, req), timeout=REQUEST_TIMEOUT_S
            )
        except asyncio.TimeoutError:
            return _error(503, "generation_timeout",
                          f"generation exceeded {REQUEST_TIMEOUT_S:.0f} s")

    @app.get("/v1/reference", dependencies=[Depends(require_key)])
    async def reference(
        title: Optional[str] = None,
        ingredients: Optional[str] = None,
        instructions: Optional[str] = None,
    ):
        if not state.records:
            return _error(404, "empty_corpus", "no recipes are indexed")
        hit = _reference_for(
            {"title": title, "ingredients": ingredients, "instructions": instructions}
        )
        if hit is None:
            return _error(404, "no_reference", "no recipe matched the query")
        return {"recipe": _recipe_json(state.by_id[hit.recipe_id]), "score": hit.score,
                "breakdown": hit.breakdown}

    @app.post("/v1/generations", status_code=201, dependencies=[Depends(require_key)])
    async def save_generation(req: SaveGenerationRequest):
        gen = state.store.save_generation(
            mode=req.mode, context=req.context, output=req.output,
            sampling=req.sampling, report=req.report, reference_id=req.reference_id,
        )
        return _generation_json(gen)

    @app.get("/v1/generations", dependencies=[Depends(require_key)])
    async def list_generations(
        page: int = Query(default=1, ge=1), page_size: int = Query(default=20, ge=1, le=100)
    ):
        items, total = state.store.list(page=page, page_size=page_size)
        return {
            "items": [_generation_json(g) for g in items],
            "total": total, "page": page, "page_size": page_size,
        }

    @app.get("/v1/generations/{generation_id}", dependencies=[Depends(require_key)])
    async def get_generation(generation_id: int):
        gen = state.store.get(generation_id)
        return {
            **_generation_json(gen),
            "ratings": [
                {"value": r.value, "created_at": r.created_at}
                for r in state.store.ratings(generation_id)
            ],
            "comments": [
                {"text": c.text, "created_at": c.created_at}
                for c in state.store.comments(generation_id)
            ],
        }

    @app.post("/v1/generations/{generation_id}/rating", status_code=201,
              dependencies=[Depends(require_key)])
    async def add_rating(generation_id: int, req: RatingRequest):
        r = state.store.add_rating(generation_id, req.value)
        return {"generation_id": r.generation_id, "value": r.value, "created_at": r.created_at}

    @app.post("/v1/generations/{generation_id}/comments", status_code=201,
              dependencies=[Depends(require_key)])
    async def add_comment(generation_id: int, req: CommentRequest):
        c = state.store.add_comment(generation_id, req.text)
        return {"generation_id": c.generation_id, "text": c.text, "created_at": c.created_at}

    return app

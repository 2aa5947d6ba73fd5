"""HTTP query service.

POST /v1/reverse ranks candidate words for a definition; GET /v1/health
reports the loaded model and language inventory; POST /v1/admin/reload swaps
in a new model directory atomically.  Responses reproduce the library
ranking exactly: the service adds no reordering or rescaling.
"""

from __future__ import annotations

import threading
import time

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .pipeline import ModelBundle, load_bundle, rank_definition


class QueryRequest(BaseModel):
    definition: str
    definition_language: str
    target_language: str
    top_n: int = Field(default=10, ge=1)


class Candidate(BaseModel):
    surface: str
    score: float
    rank: int


class QueryResponse(BaseModel):
    candidates: list[Candidate]
    model_id: str
    timing_ms: float


class ReloadRequest(BaseModel):
    model_dir: str


class SnapshotStore:
    """Holds the current immutable model snapshot; swaps are atomic, so a
    request handler always sees a fully loaded model."""

    def __init__(self, bundle: ModelBundle):
        self._bundle = bundle
        self._lock = threading.Lock()

    @property
    def current(self) -> ModelBundle:
        return self._bundle

    def swap(self, bundle: ModelBundle) -> None:
        with self._lock:
            self._bundle = bundle


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"error": {"code": code, "message": message}})


def create_app(bundle: ModelBundle,
               cors_origins: list[str] | None = None) -> FastAPI:
    app = FastAPI(title="revdict", version="1.0")
    store = SnapshotStore(bundle)
    app.state.store = store

    if cors_origins:
        app.add_middleware(CORSMiddleware, allow_origins=list(cors_origins),
                           allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(RequestValidationError)
    async def malformed(request: Request, exc: RequestValidationError):
        return _error(400, "invalid_request", str(exc.errors()[:3]))

    @app.get("/v1/health")
    def health():
        b = store.current
        return {
            "status": "ok",
            "model_id": b.model_id,
            "mode": b.mode,
            "cross_lingual": b.cross_lingual,
            "languages": b.languages,
            "target_languages": b.index.languages,
            "k": b.k,
        }

    @app.post("/v1/reverse")
    def reverse(query: QueryRequest):
        b = store.current
        known = set(b.languages) | set(b.index.languages)
        for lang in (query.definition_language, query.target_language):
            if lang not in known:
                return _error(400, "unknown_language",
                              f"language {lang!r} not in model inventory")
        if not b.supports(query.definition_language, query.target_language):
            return _error(400, "unsupported_pair",
                          f"{query.definition_language}->{query.target_language} "
                          f"not supported by a {b.mode} model")
        if not query.definition.strip():
            return _error(400, "empty_definition", "definition is empty")
        t0 = time.perf_counter()
        ranking = rank_definition(b, query.definition,
                                  query.definition_language,
                                  query.target_language, top_n=query.top_n)
        elapsed = (time.perf_counter() - t0) * 1000.0
        return QueryResponse(
            candidates=[Candidate(surface=r.surface, score=r.score, rank=r.rank)
                        for r in ranking],
            model_id=b.model_id, timing_ms=elapsed)

    @app.post("/v1/admin/reload")
    def reload_model(req: ReloadRequest):
        try:
            new_bundle = load_bundle(req.model_dir)
        except Exception as exc:
            return _error(400, "reload_failed", str(exc))
        store.swap(new_bundle)
        return {"status": "ok", "model_id": new_bundle.model_id}

    return app

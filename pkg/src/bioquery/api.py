"""HTTP API over the query service.

Endpoints (JSON bodies throughout)::

    POST /api/query      {text}               -> {query_id, answers, program, warnings}
    POST /api/explain    {query_id, answer}   -> {text, tree}
    GET  /api/complete?prefix=...             -> {tokens}
    GET  /api/vocabulary                      -> lexicon summary
    GET  /api/stats                           -> fact counts
    GET  /healthz                             -> {status}

Errors come back as ``{"error": {"code": ..., "message": ..., ...}}``
with 400 for bad queries and 404 for expired or unknown references.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .errors import BioQueryError
from .service import QueryService

_NOT_FOUND_CODES = {"unknown_query_id", "answer_not_found"}


class QueryBody(BaseModel):
    text: str


class ExplainBody(BaseModel):
    query_id: str
    answer: list[str]


def _error_response(exc: BioQueryError) -> JSONResponse:
    status = 404 if exc.code in _NOT_FOUND_CODES else 400
    return JSONResponse(status_code=status, content={"error": exc.payload()})


def create_app(service: QueryService, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="bioquery", docs_url=None, redoc_url=None)

    @app.post("/api/query")
    def query(body: QueryBody):
        try:
            return service.handle_query(body.text).payload()
        except BioQueryError as exc:
            return _error_response(exc)

    @app.post("/api/explain")
    def explain(body: ExplainBody):
        try:
            return service.handle_explain(body.query_id, tuple(body.answer))
        except BioQueryError as exc:
            return _error_response(exc)

    @app.get("/api/complete")
    def complete(prefix: str = ""):
        return {"tokens": service.handle_complete(prefix)}

    @app.get("/api/vocabulary")
    def vocabulary():
        return service.vocabulary()

    @app.get("/api/stats")
    def stats():
        return service.stats()

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app

"""HTTP service exposing the pipeline (sessions, generation, evaluation)."""
from __future__ import annotations

import json
import os
import threading
from dataclasses import asdict, dataclass, field
from pathlib import Path

from fastapi import Body, FastAPI, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .. import __version__, evalkit
from ..clueforge import ProviderConfig, make_provider
from ..gridengine import GenConfig, PuzzleDocument
from .errors import AppError, NoWordFitsError, SessionNotFound, ValidationFailed
from .sessions import (
    STATUS_GENERATED,
    SessionStore,
    begin_generation,
    canonical_json,
    complete_generation,
    fail_generation,
    request_clues,
    run_generation,
)

DATA_DIR_ENV = "KAREKURUCU_DATA_DIR"


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8765
    data_dir: str = field(
        default_factory=lambda: os.environ.get(DATA_DIR_ENV, "./karekurucu-data")
    )
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    gen: GenConfig = field(default_factory=GenConfig)
    max_inputs: int = 50
    max_text_chars: int = 20000
    workers: int = 1
    ui_dir: str | None = None


def load_service_config(path: str | Path | None = None) -> ServiceConfig:
    data = {}
    if path is not None:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    provider = ProviderConfig(**data.pop("provider", {}))
    gen = GenConfig(**data.pop("gen", {}))
    return ServiceConfig(provider=provider, gen=gen, **data)


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    store = SessionStore(config.data_dir)
    provider_box: dict = {}
    provider_guard = threading.Lock()

    def provider():
        with provider_guard:
            if "provider" not in provider_box:
                provider_box["provider"] = make_provider(config.provider)
            return provider_box["provider"]

    app = FastAPI(title="karekurucu", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(AppError)
    async def app_error_handler(_request, exc: AppError):
        return JSONResponse(exc.to_dict(), status_code=exc.http_status)

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/sessions", status_code=201)
    def create_session(payload: dict = Body(...)) -> dict:
        inputs = payload.get("inputs")
        if not isinstance(inputs, list):
            raise ValidationFailed("body must contain an 'inputs' list")
        if len(inputs) > config.max_inputs:
            raise ValidationFailed(
                f"too many inputs (limit {config.max_inputs})",
                {"limit": config.max_inputs},
            )
        for i, item in enumerate(inputs):
            text = item.get("text") if isinstance(item, dict) else None
            if text and len(text) > config.max_text_chars:
                raise ValidationFailed(
                    f"input {i}: text exceeds {config.max_text_chars} characters",
                    {"index": i, "limit": config.max_text_chars},
                )
        return store.create(inputs).to_dict()

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        return store.get(session_id).to_dict()

    @app.post("/sessions/{session_id}/clues")
    def post_clues(session_id: str) -> dict:
        return request_clues(store, session_id, provider()).to_dict()

    @app.post("/sessions/{session_id}/puzzle", status_code=202)
    def post_puzzle(session_id: str, payload: dict = Body(...)) -> dict:
        selections = payload.get("selections")
        if not isinstance(selections, dict):
            raise ValidationFailed("body must contain a 'selections' object")
        overrides = payload.get("config") or {}
        if not isinstance(overrides, dict):
            raise ValidationFailed("'config' must be an object")
        try:
            gen_cfg = GenConfig(**{**asdict(config.gen), **overrides})
        except (TypeError, ValueError) as exc:
            raise ValidationFailed(f"bad generation config: {exc}")
        expected_version = payload.get("expected_version")
        session, resolved = begin_generation(
            store, session_id, selections, expected_version=expected_version
        )
        if not any(
            len(a) <= gen_cfg.width or len(a) <= gen_cfg.height for a in resolved
        ):
            exc = NoWordFitsError(
                f"no selected word fits a {gen_cfg.width}x{gen_cfg.height} grid"
            )
            fail_generation(store, session_id, exc.to_dict())
            raise exc

        def worker() -> None:
            try:
                puzzle, reason = run_generation(
                    resolved, gen_cfg, workers=config.workers
                )
            except AppError as exc:
                fail_generation(store, session_id, exc.to_dict())
                return
            except Exception as exc:  # keep the session pollable on bugs
                fail_generation(
                    store,
                    session_id,
                    {"code": "GenerationFailed", "message": str(exc), "details": {}},
                )
                return
            complete_generation(store, session_id, puzzle, reason)

        threading.Thread(target=worker, daemon=True).start()
        return session.to_dict()

    def _require_puzzle(session_id: str) -> dict:
        session = store.get(session_id)
        if session.status != STATUS_GENERATED or session.puzzle is None:
            raise SessionNotFound(
                f"session {session_id} has no generated puzzle yet",
                {"status": session.status, "generation": session.generation},
            )
        return session.puzzle

    @app.get("/sessions/{session_id}/puzzle.json")
    def get_puzzle_json(session_id: str) -> Response:
        puzzle = _require_puzzle(session_id)
        return Response(canonical_json(puzzle), media_type="application/json")

    @app.get("/sessions/{session_id}/puzzle.txt")
    def get_puzzle_text(session_id: str) -> Response:
        puzzle = _require_puzzle(session_id)
        doc = PuzzleDocument.from_dict(puzzle)
        return Response(doc.to_text(), media_type="text/plain; charset=utf-8")

    @app.post("/eval/rouge")
    def eval_rouge(payload: dict = Body(...)) -> dict:
        pairs = payload.get("pairs")
        if not isinstance(pairs, list) or not pairs:
            raise ValidationFailed("body must contain a non-empty 'pairs' list")
        try:
            tuples = [(item["candidate"], item["reference"]) for item in pairs]
        except (KeyError, TypeError):
            raise ValidationFailed("each pair needs 'candidate' and 'reference'")
        scores = evalkit.corpus_rouge(tuples)
        return {
            "metrics": {
                metric: vars(score).copy() for metric, score in scores.items()
            },
            "formatted": {
                metric: {
                    "precision": evalkit.format_percent(score.precision),
                    "recall": evalkit.format_percent(score.recall),
                    "f1": evalkit.format_percent(score.f1),
                }
                for metric, score in scores.items()
            },
        }

    if config.ui_dir and Path(config.ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    return app


def serve(config: ServiceConfig) -> None:
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port,
                log_level="warning")

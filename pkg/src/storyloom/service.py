"""HTTP access to the pipeline: every route is a thin adapter over library
operations, and every failure arrives as one structured error envelope."""

from __future__ import annotations

import threading
from typing import Optional

from fastapi import Body, FastAPI, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.routing import APIRoute

from . import storyboard
from .composer import Composer, session_to_dict, story_to_dict
from .curation import (
    Exemplar,
    exemplar_set_to_dict,
    extract_pattern,
    request_exemplars,
)
from .errors import StoryloomError, ValidationFailure
from .patterns import Genre, pattern_from_dict, pattern_to_dict, profile_of

STATUS_BY_CODE = {
    "not-found": 404,
    "unknown-pattern": 404,
    "unknown-genre": 404,
    "invalid-state": 409,
    "revision-limit": 409,
    "validation": 422,
    "invalid-premise": 422,
    "empty-input": 422,
    "empty-result": 422,
    "missing-slot": 422,
    "provider-error": 502,
    "retries-exhausted": 502,
    "fixture-miss": 502,
    "parse-failure": 502,
    "length-violation": 502,
}

_MEDIA_TYPES = {
    "html": "text/html; charset=utf-8",
    "markdown": "text/markdown; charset=utf-8",
    "json": "application/json; charset=utf-8",
}


def _require_str(payload: dict, key: str) -> str:
    value = payload.get(key)
    if not isinstance(value, str):
        raise ValidationFailure(
            f"body must carry a string {key!r}", details={"key": key}
        )
    return value


def _parse_exemplars(payload: dict, genre: Genre) -> list[Exemplar]:
    if "exemplars" in payload:
        entries = payload["exemplars"]
        if not isinstance(entries, list):
            raise ValidationFailure("exemplars must be a list")
        try:
            return [
                Exemplar(
                    genre=Genre(str(e.get("genre", genre.name))),
                    title=str(e["title"]),
                    year_text=str(e["year_text"]),
                    justification=str(e["justification"]),
                )
                for e in entries
            ]
        except (AttributeError, KeyError, TypeError) as exc:
            raise ValidationFailure(
                f"malformed exemplar entry: {exc}"
            ) from exc
    if "titles" in payload:
        entries = payload["titles"]
        if not isinstance(entries, list):
            raise ValidationFailure("titles must be a list")
        try:
            return [
                Exemplar(
                    genre=genre,
                    title=str(e["title"]),
                    year_text=str(e["year_text"]),
                    justification="submitted directly",
                )
                for e in entries
            ]
        except (KeyError, TypeError) as exc:
            raise ValidationFailure(f"malformed title entry: {exc}") from exc
    raise ValidationFailure("body must carry exemplars or titles")


def create_app(composer: Composer) -> FastAPI:
    app = FastAPI(title="storyloom", docs_url=None, redoc_url=None)

    # one writer per session; everything else is safe to interleave
    locks: dict[str, threading.Lock] = {}
    locks_guard = threading.Lock()

    def session_lock(session_id: str) -> threading.Lock:
        with locks_guard:
            return locks.setdefault(session_id, threading.Lock())

    @app.exception_handler(StoryloomError)
    async def on_storyloom_error(request, exc: StoryloomError):
        return JSONResponse(
            status_code=STATUS_BY_CODE.get(exc.code, 500),
            content={
                "code": exc.code,
                "message": exc.message,
                "details": exc.details,
            },
        )

    @app.exception_handler(RequestValidationError)
    async def on_bad_request(request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422,
            content={
                "code": "validation",
                "message": "malformed request body",
                "details": {
                    "errors": [
                        {"loc": list(e.get("loc", [])), "msg": str(e.get("msg"))}
                        for e in exc.errors()
                    ]
                },
            },
        )

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/spec")
    def spec():
        routes = sorted(
            {
                (method, route.path)
                for route in app.routes
                if isinstance(route, APIRoute)
                for method in route.methods
                if method in ("GET", "POST")
            }
        )
        return {
            "service": "storyloom",
            "routes": [
                {"method": method, "path": path} for method, path in routes
            ],
        }

    @app.get("/patterns")
    def list_patterns():
        return {
            "patterns": [
                pattern_to_dict(p) for p in composer.catalog.list()
            ]
        }

    @app.get("/patterns/{pattern_id}")
    def get_pattern(pattern_id: str):
        return pattern_to_dict(composer.catalog.get(pattern_id))

    @app.post("/patterns", status_code=201)
    def import_pattern(payload: dict = Body(...)):
        stored = composer.catalog.add(pattern_from_dict(payload))
        return pattern_to_dict(stored)

    @app.post("/exemplar-requests")
    def request_exemplar_set(payload: dict = Body(...)):
        genres = payload.get("genres")
        if not isinstance(genres, list) or not genres:
            raise ValidationFailure("body must carry a non-empty genres list")
        profiles = [profile_of(Genre(str(name))) for name in genres]
        result = request_exemplars(profiles, composer.gateway)
        return exemplar_set_to_dict(result)

    @app.post("/extractions", status_code=201)
    def run_extraction(payload: dict = Body(...)):
        genre = Genre(_require_str(payload, "genre"))
        mode = payload.get("mode", "deterministic")
        exemplars = _parse_exemplars(payload, genre)
        pattern = extract_pattern(exemplars, composer.gateway, mode=str(mode))
        stored = composer.catalog.add(pattern)
        return pattern_to_dict(stored)

    @app.post("/sessions", status_code=201)
    def create_session(payload: dict = Body(...)):
        session = composer.create_session(
            _require_str(payload, "premise"),
            _require_str(payload, "pattern_id"),
        )
        return session_to_dict(session)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return session_to_dict(composer.load_session(session_id))

    @app.post("/sessions/{session_id}/draft")
    def draft(session_id: str, payload: Optional[dict] = Body(default=None)):
        with session_lock(session_id):
            session = composer.load_session(session_id)
            composer.draft_stage(session, (payload or {}).get("suggestion"))
        return session_to_dict(session)

    @app.post("/sessions/{session_id}/regenerate")
    def regenerate(
        session_id: str, payload: Optional[dict] = Body(default=None)
    ):
        with session_lock(session_id):
            session = composer.load_session(session_id)
            composer.regenerate(session, (payload or {}).get("suggestion"))
        return session_to_dict(session)

    @app.post("/sessions/{session_id}/accept")
    def accept(session_id: str):
        with session_lock(session_id):
            session = composer.load_session(session_id)
            composer.accept(session)
        return session_to_dict(session)

    @app.post("/sessions/{session_id}/finalize")
    def finalize(session_id: str):
        with session_lock(session_id):
            session = composer.load_session(session_id)
            story = composer.finalize(session)
        return story_to_dict(story)

    @app.get("/stories/{story_id}")
    def get_story(story_id: str):
        return story_to_dict(composer.load_story(story_id))

    @app.get("/stories/{story_id}/export")
    def export_story(story_id: str, format: str = "html"):
        story = composer.load_story(story_id)
        pattern = composer.catalog.get(story.pattern_id)
        document = storyboard.build(story, pattern)
        payload = storyboard.export(document, format)
        filename = storyboard.export_filename(story_id, format)
        return Response(
            content=payload,
            media_type=_MEDIA_TYPES[format],
            headers={
                "Content-Disposition": f'attachment; filename="{filename}"'
            },
        )

    return app

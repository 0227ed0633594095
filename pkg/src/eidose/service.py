"""HTTP facade over the event-sourced trial store.

All state lives in the append-only logs; every response is recomputed by
replay, so restarting the process loses nothing. Error responses share one
shape: {"code": "validation" | "conflict" | "not_found" | "internal",
"message": str} with HTTP status 400 / 409 / 404 / 500.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import Body, FastAPI, Header, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .eventlog import (
    ConflictError,
    NotFoundError,
    TrialEvent,
    TrialStore,
    ValidationError,
    decision_view,
    replay,
)
from .mathcore import DomainError

__all__ = ["create_app"]


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def create_app(data_dir: str | Path, ui_dir: str | Path | None = None) -> FastAPI:
    store = TrialStore(data_dir)
    app = FastAPI(title="dose-finding decision service", docs_url=None, redoc_url=None)

    @app.exception_handler(ValidationError)
    async def _on_validation(request: Request, exc: ValidationError) -> JSONResponse:
        return _error(400, "validation", str(exc))

    @app.exception_handler(DomainError)
    async def _on_domain(request: Request, exc: DomainError) -> JSONResponse:
        return _error(400, "validation", str(exc))

    @app.exception_handler(RequestValidationError)
    async def _on_request(request: Request, exc: RequestValidationError) -> JSONResponse:
        return _error(400, "validation", str(exc))

    @app.exception_handler(ConflictError)
    async def _on_conflict(request: Request, exc: ConflictError) -> JSONResponse:
        return _error(409, "conflict", str(exc))

    @app.exception_handler(NotFoundError)
    async def _on_missing(request: Request, exc: NotFoundError) -> JSONResponse:
        return _error(404, "not_found", f"unknown trial {exc.args[0]!r}")

    @app.exception_handler(Exception)
    async def _on_internal(request: Request, exc: Exception) -> JSONResponse:
        return _error(500, "internal", f"{type(exc).__name__}: {exc}")

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.post("/trials", status_code=201)
    def create_trial(
        body: dict = Body(...),
        idempotency_key: str | None = Header(default=None, alias="Idempotency-Key"),
    ) -> dict:
        if "config" not in body or not isinstance(body["config"], dict):
            raise ValidationError("body must carry a config object")
        trial_id = store.create_trial(body["config"], idempotency_key=idempotency_key)
        return {"trial_id": trial_id, "sequence": store.events(trial_id)[-1].seq}

    @app.post("/trials/{trial_id}/events")
    def append_event(
        trial_id: str,
        body: dict = Body(...),
        override: bool = Query(default=False),
        expected_sequence: int | None = Header(default=None, alias="X-Expected-Sequence"),
    ) -> dict:
        payload = dict(body)
        try:
            at = float(payload.pop("at"))
            kind = str(payload.pop("kind"))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"event body needs numeric 'at' and string 'kind': {exc}")
        seq = store.append(
            trial_id, at, kind, payload,
            expected_sequence=expected_sequence, override=override,
        )
        return {"trial_id": trial_id, "sequence": seq}

    def _view_at(trial_id: str, as_of: float | None) -> dict:
        events = store.events(trial_id)
        state = replay(events, as_of=as_of)
        when = as_of if as_of is not None else max(state.last_at, 0.0)
        return decision_view(state, when)

    @app.get("/trials/{trial_id}/decision")
    def get_decision(trial_id: str, as_of: float | None = Query(default=None)) -> dict:
        if as_of is not None and as_of < 0.0:
            raise ValidationError("as_of must be >= 0")
        return _view_at(trial_id, as_of)

    @app.post("/trials/{trial_id}/decision:what-if")
    def what_if(trial_id: str, body: dict = Body(...)) -> dict:
        as_of = body.get("as_of")
        if as_of is not None:
            as_of = float(as_of)
            if as_of < 0.0:
                raise ValidationError("as_of must be >= 0")
        raw = body.get("events")
        if not isinstance(raw, list) or not raw:
            raise ValidationError("body must carry a non-empty list of hypothetical events")
        extra = []
        for doc in raw:
            if not isinstance(doc, dict) or "at" not in doc or "kind" not in doc:
                raise ValidationError("each hypothetical event needs 'at' and 'kind'")
            payload = {k: v for k, v in doc.items() if k not in ("at", "kind", "seq")}
            extra.append(TrialEvent.make(float(doc["at"]), str(doc["kind"]), **payload))
        events = store.events(trial_id)
        baseline_state = replay(events, as_of=as_of)
        when = as_of if as_of is not None else max(baseline_state.last_at, 0.0)
        hypo_state = replay(events, as_of=as_of, extra=tuple(extra))
        hypo_when = max(when, max(e.at for e in extra))
        return {
            "baseline": decision_view(baseline_state, when),
            "hypothetical": decision_view(hypo_state, hypo_when),
        }

    @app.get("/trials/{trial_id}/state")
    def get_state(trial_id: str) -> dict:
        events = store.events(trial_id)
        state = replay(events)
        return {
            "trial_id": trial_id,
            "sequence": events[-1].seq,
            "identified": state.identified,
            "config": state.config.to_dict(),
            "events": [
                {"seq": e.seq, "at": e.at, "kind": e.kind, **e.payload} for e in events
            ],
        }

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app

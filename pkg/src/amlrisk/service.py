"""HTTP facade over profiling, assessment, what-if, and corpus management.

Each assessment reads an immutable (catalog, store snapshot) pair captured
at request start; ingestion swaps the store snapshot atomically between
requests. Scoring is stateless: replaying a request against a restarted
service reproduces the assessment exactly (ids included; timestamps can be
pinned via the request body).
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import Body, FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import HTMLResponse, JSONResponse, PlainTextResponse

from .catalog import Catalog, load_bundled_catalog
from .engine import (
    CountermeasureProfile,
    EngineConfig,
    EngineError,
    assess,
    reassess_with_countermeasure,
    uniform_retraining_countermeasure,
)
from .gateway import GatewayClient, GatewayError, ProviderConfig
from .profiling import (
    DisallowedAnswerError,
    MissingAnswerError,
    ProfilingError,
    Questionnaire,
    build_profile,
    customize_questionnaire,
    load_questionnaire,
)
from .records import (
    RecordError,
    RecordStore,
    dataset_stats,
    ingest_records,
    load_bundled_corpus,
    record_from_dict,
)
from .reporting import (
    generate_scenarios,
    parse_machine_report,
    render_html_fragment,
    render_report,
)


@dataclass
class SessionState:
    """Draft state for one UI session; independent of stored assessments."""

    session_id: str
    draft_responses: dict = field(default_factory=dict)
    system_description: str = ""
    threat_actor: str = ""
    last_assessment_id: Optional[str] = None


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": {"code": code, "message": message}})


def create_app(
    catalog: Optional[Catalog] = None,
    store: Optional[RecordStore] = None,
    config: Optional[EngineConfig] = None,
    gateway: Optional[GatewayClient] = None,
    questionnaire: Optional[Questionnaire] = None,
    assessments_dir: Optional[str] = None,
) -> FastAPI:
    """Build the service; refuses to start with an invalid catalog."""
    app = FastAPI(title="amlrisk", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"],
    )

    app.state.catalog = catalog or load_bundled_catalog()
    app.state.store = store if store is not None else load_bundled_corpus()
    app.state.config = config or EngineConfig()
    app.state.gateway = gateway or GatewayClient(ProviderConfig(provider="stub"))
    app.state.questionnaire = questionnaire or load_questionnaire()
    app.state.profiles = {}
    app.state.assessments = {}
    app.state.sessions = {}
    app.state.assessments_dir = Path(assessments_dir) if assessments_dir else None
    if app.state.assessments_dir:
        app.state.assessments_dir.mkdir(parents=True, exist_ok=True)

    def _persist(assessment) -> None:
        app.state.assessments[assessment.assessment_id] = assessment
        if app.state.assessments_dir:
            path = app.state.assessments_dir / f"{assessment.assessment_id}.json"
            path.write_text(render_report(assessment, "machine"), encoding="utf-8")

    def _load_assessment(assessment_id: str):
        if assessment_id in app.state.assessments:
            return app.state.assessments[assessment_id]
        if app.state.assessments_dir:
            path = app.state.assessments_dir / f"{assessment_id}.json"
            if path.exists():
                assessment = parse_machine_report(path.read_text(encoding="utf-8"))
                app.state.assessments[assessment_id] = assessment
                return assessment
        return None

    @app.exception_handler(MissingAnswerError)
    async def _missing_answer(request: Request, exc: MissingAnswerError):
        return _error(422, "missing-answer", str(exc))

    @app.exception_handler(DisallowedAnswerError)
    async def _disallowed_answer(request: Request, exc: DisallowedAnswerError):
        return _error(422, "disallowed-answer", str(exc))

    @app.exception_handler(ProfilingError)
    async def _profiling_error(request: Request, exc: ProfilingError):
        return _error(422, "invalid-profile", str(exc))

    @app.exception_handler(EngineError)
    async def _engine_error(request: Request, exc: EngineError):
        return _error(422, "engine-error", str(exc))

    @app.exception_handler(RecordError)
    async def _record_error(request: Request, exc: RecordError):
        return _error(422, "invalid-records", str(exc))

    @app.get("/catalog")
    def get_catalog():
        return app.state.catalog.to_dict()

    @app.get("/questionnaire")
    def get_questionnaire(description: Optional[str] = Query(default=None)):
        base = app.state.questionnaire
        if not description:
            return base.to_dict()
        try:
            custom = customize_questionnaire(base, description, app.state.gateway)
        except GatewayError as exc:
            return _error(502, "gateway-unavailable", str(exc))
        return custom.to_dict()

    @app.post("/profiles")
    def post_profile(payload: dict = Body(...)):
        answers = payload.get("answers", payload)
        profile = build_profile(
            answers,
            payload.get("system_description", ""),
            payload.get("threat_actor", ""),
            questionnaire=app.state.questionnaire,
        )
        app.state.profiles[profile.profile_id] = profile
        return profile.to_dict()

    @app.post("/assessments")
    def post_assessment(payload: dict = Body(...)):
        if "profile_id" in payload and "answers" not in payload:
            profile = app.state.profiles.get(payload["profile_id"])
            if profile is None:
                return _error(404, "unknown-profile", f"unknown profile {payload['profile_id']!r}")
        else:
            profile = build_profile(
                payload.get("answers", {}),
                payload.get("system_description", ""),
                payload.get("threat_actor", ""),
                questionnaire=app.state.questionnaire,
            )
            app.state.profiles[profile.profile_id] = profile
        snapshot = app.state.store  # captured once; immutable for this request
        assessment = assess(
            app.state.catalog, profile, snapshot, app.state.config,
            created_at=payload.get("created_at"),
        )
        _persist(assessment)
        session_id = payload.get("session_id")
        if session_id and session_id in app.state.sessions:
            app.state.sessions[session_id].last_assessment_id = assessment.assessment_id
        return assessment.to_dict()

    @app.get("/assessments/{assessment_id}")
    def get_assessment(assessment_id: str):
        assessment = _load_assessment(assessment_id)
        if assessment is None:
            return _error(404, "unknown-assessment", f"unknown assessment {assessment_id!r}")
        return assessment.to_dict()

    @app.get("/assessments/{assessment_id}/report")
    def get_assessment_report(assessment_id: str, format: str = Query(default="human"),
                              top: Optional[int] = Query(default=None)):
        assessment = _load_assessment(assessment_id)
        if assessment is None:
            return _error(404, "unknown-assessment", f"unknown assessment {assessment_id!r}")
        if format == "html":
            return HTMLResponse(render_html_fragment(assessment, top))
        if format == "machine":
            return JSONResponse(json.loads(render_report(assessment, "machine")))
        return PlainTextResponse(render_report(assessment, "human", top))

    @app.post("/assessments/{assessment_id}/whatif")
    def post_whatif(assessment_id: str, payload: dict = Body(...)):
        assessment = _load_assessment(assessment_id)
        if assessment is None:
            return _error(404, "unknown-assessment", f"unknown assessment {assessment_id!r}")
        if "retrain_rate" in payload:
            rate = float(payload["retrain_rate"])
            if not (0.0 <= rate <= 1.0):
                return _error(422, "invalid-rate", f"retrain rate out of range: {rate}")
            countermeasure = uniform_retraining_countermeasure(app.state.catalog, rate)
        elif "rates" in payload:
            countermeasure = CountermeasureProfile(
                name=payload.get("name", "countermeasure"),
                rates={k: float(v) for k, v in payload["rates"].items()},
                provenance=payload.get("provenance", ""),
            )
        else:
            return _error(422, "invalid-countermeasure",
                          "body must carry 'retrain_rate' or 'rates'")
        reassessed = reassess_with_countermeasure(assessment, countermeasure, app.state.catalog)
        return reassessed.to_dict()

    @app.post("/assessments/{assessment_id}/scenarios")
    def post_scenarios(assessment_id: str, payload: dict = Body(default={})):
        assessment = _load_assessment(assessment_id)
        if assessment is None:
            return _error(404, "unknown-assessment", f"unknown assessment {assessment_id!r}")
        top_k = int(payload.get("top_k", 5))
        profile = app.state.profiles.get(assessment.profile_id)
        description = payload.get("system_description") or (
            profile.system_description if profile else ""
        )
        actor = payload.get("threat_actor") or (profile.threat_actor if profile else "")
        cards = generate_scenarios(
            assessment, top_k, description, actor, app.state.gateway, app.state.catalog,
        )
        return {"cards": [card.to_dict() for card in cards]}

    @app.post("/records:ingest")
    def post_ingest(payload: dict = Body(...)):
        try:
            candidates = [record_from_dict(obj) for obj in payload.get("records", [])]
        except RecordError as exc:
            return _error(422, "invalid-records", str(exc))
        report = ingest_records(app.state.store, candidates)
        app.state.store = report.store  # atomic snapshot swap
        return {
            "snapshot_id": report.store.snapshot_id,
            "accepted": list(report.accepted),
            "rejected": [{"record_id": rid, "reason": reason} for rid, reason in report.rejected],
        }

    @app.get("/stats")
    def get_stats():
        return dataset_stats(app.state.store).to_dict()

    @app.post("/sessions")
    def post_session():
        session = SessionState(session_id=f"sess-{uuid.uuid4().hex[:12]}")
        app.state.sessions[session.session_id] = session
        return {"session_id": session.session_id}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session = app.state.sessions.get(session_id)
        if session is None:
            return _error(404, "unknown-session", f"unknown session {session_id!r}")
        return {
            "session_id": session.session_id,
            "draft_responses": session.draft_responses,
            "system_description": session.system_description,
            "threat_actor": session.threat_actor,
            "last_assessment_id": session.last_assessment_id,
        }

    @app.put("/sessions/{session_id}")
    def put_session(session_id: str, payload: dict = Body(...)):
        session = app.state.sessions.get(session_id)
        if session is None:
            return _error(404, "unknown-session", f"unknown session {session_id!r}")
        session.draft_responses = dict(payload.get("draft_responses", session.draft_responses))
        session.system_description = payload.get("system_description", session.system_description)
        session.threat_actor = payload.get("threat_actor", session.threat_actor)
        return {"session_id": session.session_id, "answered": len(session.draft_responses)}

    return app


def serve(
    host: str = "127.0.0.1",
    port: int = 8000,
    **app_kwargs,
) -> None:
    """Run the service with uvicorn; raises on bind or validation failure."""
    import uvicorn

    app = create_app(**app_kwargs)
    uvicorn.run(app, host=host, port=port, log_level="warning")

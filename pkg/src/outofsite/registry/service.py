"""HTTP face of the registry: campaign distribution, submission, review,
metrics ingestion, and aggregate stats.

Request bodies are parsed by hand so every rejection maps to the documented
status codes: 400 schema, 401 auth, 404 unknown, 409 invalid transition.
Non-approved campaigns are invisible on every read path: unknown and
unapproved ids are indistinguishable from the outside.
"""
from __future__ import annotations

import json
from datetime import datetime, timezone
from typing import Callable, Mapping

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..campaigns import (
    CampaignParseError,
    ReviewStatus,
    campaign_to_payload,
    parse_campaign,
)
from ..metrics import BatchParseError, parse_batch
from .store import (
    CHECKLIST_FLAGS,
    ChecklistInconsistentError,
    DuplicateIdError,
    InvalidTransitionError,
    RegistryStore,
    ReviewDecision,
    UnknownCampaignError,
)


def _utc_now() -> datetime:
    return datetime.now(timezone.utc)


def _error(status: int, code: str, **extra) -> JSONResponse:
    return JSONResponse({"error": code, **extra}, status_code=status)


def _parse_error_report(exc: CampaignParseError) -> list[dict]:
    if exc.report is not None:
        return exc.report.to_payload()
    return [{"code": exc.code, "path": "", "message": str(exc), "severity": "error"}]


def create_app(
    store: RegistryStore | None = None,
    *,
    reviewer_tokens: Mapping[str, str] | None = None,
    clock: Callable[[], datetime] = _utc_now,
) -> FastAPI:
    store = store if store is not None else RegistryStore()
    tokens = dict(reviewer_tokens or {})
    app = FastAPI(title="outofsite registry", openapi_url=None, docs_url=None)
    app.state.store = store

    def authorized(request: Request) -> str | None:
        header = request.headers.get("authorization", "")
        if not header.startswith("Bearer "):
            return None
        return tokens.get(header[len("Bearer "):].strip())

    @app.get("/v1/campaigns")
    def list_campaigns() -> JSONResponse:
        campaigns = store.approved_campaigns()
        return JSONResponse(
            {
                "dataset_version": store.dataset_version(),
                "campaigns": [campaign_to_payload(c) for c in campaigns],
            }
        )

    @app.get("/v1/campaigns/{campaign_id}")
    def get_campaign(campaign_id: str) -> JSONResponse:
        try:
            status = store.campaign_status(campaign_id)
        except UnknownCampaignError:
            return _error(404, "UNKNOWN_CAMPAIGN")
        if status is not ReviewStatus.APPROVED:
            return _error(404, "UNKNOWN_CAMPAIGN")
        return JSONResponse(campaign_to_payload(store.get_campaign(campaign_id)))

    @app.post("/v1/campaigns")
    async def submit_campaign(request: Request) -> JSONResponse:
        raw = await request.body()
        try:
            campaign = parse_campaign(raw)
        except CampaignParseError as exc:
            return _error(400, "VALIDATION_FAILED", report=_parse_error_report(exc))
        try:
            stored = store.submit_campaign(campaign, clock())
        except DuplicateIdError:
            return _error(409, "DUPLICATE_ID")
        return JSONResponse(
            {"id": stored.id, "review_status": ReviewStatus.SUBMITTED.value, "version": 1},
            status_code=201,
        )

    @app.post("/v1/campaigns/{campaign_id}/review")
    async def review_campaign(campaign_id: str, request: Request) -> JSONResponse:
        reviewer = authorized(request)
        if reviewer is None:
            return _error(401, "UNAUTHORIZED")
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError:
            return _error(400, "SCHEMA_ERROR", detail="body must be JSON")
        if not isinstance(body, dict):
            return _error(400, "SCHEMA_ERROR", detail="body must be an object")
        unknown = set(body) - {"decision", "checklist", "reviewer_note"}
        if unknown:
            return _error(400, "SCHEMA_ERROR", detail=f"unknown fields {sorted(unknown)}")
        decision_raw = body.get("decision")
        if decision_raw not in (ReviewStatus.APPROVED.value, ReviewStatus.REJECTED.value):
            return _error(400, "SCHEMA_ERROR", detail="decision must be approved or rejected")
        checklist = body.get("checklist")
        if (
            not isinstance(checklist, dict)
            or set(checklist) != set(CHECKLIST_FLAGS)
            or any(not isinstance(v, bool) for v in checklist.values())
        ):
            return _error(400, "SCHEMA_ERROR", detail="checklist must carry the three boolean flags")
        note = body.get("reviewer_note", "")
        if not isinstance(note, str):
            return _error(400, "SCHEMA_ERROR", detail="reviewer_note must be a string")
        decision = ReviewDecision(
            campaign_id=campaign_id,
            decision=ReviewStatus(decision_raw),
            checklist=checklist,
            reviewer_note=note,
        )
        try:
            new_status = store.review_campaign(decision, reviewer, clock())
        except UnknownCampaignError:
            return _error(404, "UNKNOWN_CAMPAIGN")
        except InvalidTransitionError:
            return _error(409, "INVALID_TRANSITION")
        except ChecklistInconsistentError:
            return _error(409, "CHECKLIST_INCONSISTENT")
        return JSONResponse({"id": campaign_id, "review_status": new_status.value})

    @app.put("/v1/campaigns/{campaign_id}")
    async def update_campaign(campaign_id: str, request: Request) -> JSONResponse:
        reviewer = authorized(request)
        if reviewer is None:
            return _error(401, "UNAUTHORIZED")
        raw = await request.body()
        try:
            campaign = parse_campaign(raw)
        except CampaignParseError as exc:
            return _error(400, "VALIDATION_FAILED", report=_parse_error_report(exc))
        if campaign.id != campaign_id:
            return _error(
                400,
                "VALIDATION_FAILED",
                report=[{
                    "code": "ID_MISMATCH",
                    "path": "id",
                    "message": "document id must match the path id",
                    "severity": "error",
                }],
            )
        try:
            version = store.update_campaign(campaign, clock())
        except UnknownCampaignError:
            return _error(404, "UNKNOWN_CAMPAIGN")
        status = store.campaign_status(campaign_id)
        return JSONResponse(
            {"id": campaign_id, "version": version, "review_status": status.value}
        )

    @app.post("/v1/metrics")
    async def ingest_metrics(request: Request) -> JSONResponse:
        raw = await request.body()
        try:
            batch = parse_batch(raw)
        except BatchParseError as exc:
            return _error(400, "SCHEMA_ERROR", detail=str(exc))
        return JSONResponse(store.ingest_batch(batch))

    @app.get("/v1/campaigns/{campaign_id}/stats")
    def get_stats(campaign_id: str) -> JSONResponse:
        try:
            status = store.campaign_status(campaign_id)
        except UnknownCampaignError:
            return _error(404, "UNKNOWN_CAMPAIGN")
        if status is not ReviewStatus.APPROVED:
            return _error(404, "UNKNOWN_CAMPAIGN")
        stats = store.stats(campaign_id)
        return JSONResponse(
            {
                "campaign_id": stats.campaign_id,
                "participants": stats.participants,
                "visits_blocked": stats.visits_blocked,
                "results_altered": stats.results_altered,
                "products_hidden": stats.products_hidden,
                "seed_offsets": dict(stats.seed_offsets),
            }
        )

    return app

"""HTTP surface of the review service.

    POST /api/v1/studies                    multipart: metadata + video -> 201 Study
    GET  /api/v1/studies?status=&operator=  -> 200 list
    GET  /api/v1/studies/{id}               -> 200 Study
    GET  /api/v1/studies/{id}/video         -> 200 octet-stream
    GET  /api/v1/studies/{id}/keyframes/{frame_index}.png -> 200 image/png
    POST /api/v1/studies/{id}/review        -> 200 Study
    GET  /api/v1/health                     -> 200 {status, queue_depth, worker_count}

Bearer-token auth with two roles; operators see their own studies,
specialists see everything. Errors are {code, message, study_id?}.
"""

from __future__ import annotations

import json

from fastapi import Depends, FastAPI, File, Form, Request, Response, UploadFile
from fastapi.responses import JSONResponse

from . import models as m
from .core import OPERATOR, SPECIALIST, StudyService

_STATUS_FOR = {
    m.NotFound: 404,
    m.Unauthorized: 403,
    m.UnknownOperator: 403,
    m.PayloadTooLarge: 413,
    m.InvalidState: 409,
    m.AlreadyReviewed: 409,
    m.ValidationError: 422,
}


def create_app(service: StudyService, tokens: dict[str, dict],
               worker_count: int = 0) -> FastAPI:
    """Build the ASGI app over a service instance and a token -> user map."""
    app = FastAPI(title="natalia review service", docs_url=None, redoc_url=None)

    def current_user(request: Request) -> dict:
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            raise m.Unauthorized("missing bearer token")
        user = tokens.get(header[7:].strip())
        if user is None:
            raise m.Unauthorized("unknown token")
        return user

    def visible_study(user: dict, study_id: str) -> dict:
        doc = service.get_study(study_id)
        if user["role"] == OPERATOR and doc["operator_id"] != user["user_id"]:
            raise m.Unauthorized("operators may only access their own studies")
        return doc

    @app.exception_handler(m.ServiceError)
    async def service_error_handler(request: Request, exc: m.ServiceError):
        status = _STATUS_FOR.get(type(exc), 400)
        body = {"code": exc.code, "message": str(exc)}
        study_id = request.path_params.get("study_id")
        if study_id:
            body["study_id"] = study_id
        return JSONResponse(status_code=status, content=body)

    @app.get("/api/v1/health")
    async def health():
        return {
            "status": "ok",
            "queue_depth": service.queue_depth(),
            "worker_count": worker_count,
        }

    @app.post("/api/v1/studies", status_code=201)
    async def create_study(
        metadata: str = Form(...),
        video: UploadFile = File(...),
        user: dict = Depends(current_user),
    ):
        if user["role"] != OPERATOR:
            raise m.Unauthorized("only operators upload studies")
        try:
            meta = json.loads(metadata)
        except json.JSONDecodeError:
            raise m.ValidationError("metadata must be a JSON object") from None
        if not isinstance(meta, dict):
            raise m.ValidationError("metadata must be a JSON object")
        payload = await video.read()
        doc = service.create_study(user["user_id"], meta.get("trajectory", ""), payload)
        return m.public_study_view(doc)

    @app.get("/api/v1/studies")
    async def list_studies(
        status: str | None = None,
        operator: str | None = None,
        pending_review: bool = False,
        user: dict = Depends(current_user),
    ):
        if user["role"] == OPERATOR:
            operator = user["user_id"]
        docs = service.list_studies(status=status, operator=operator,
                                    pending_review=pending_review)
        return [m.public_study_view(d) for d in docs]

    @app.get("/api/v1/studies/{study_id}")
    async def get_study(study_id: str, user: dict = Depends(current_user)):
        return m.public_study_view(visible_study(user, study_id))

    @app.get("/api/v1/studies/{study_id}/video")
    async def download_video(study_id: str, user: dict = Depends(current_user)):
        visible_study(user, study_id)
        return Response(content=service.download_video(study_id),
                        media_type="application/octet-stream")

    @app.get("/api/v1/studies/{study_id}/keyframes/{frame_index}.png")
    async def keyframe_image(study_id: str, frame_index: int,
                             user: dict = Depends(current_user)):
        visible_study(user, study_id)
        return Response(content=service.get_keyframe_image(study_id, frame_index),
                        media_type="image/png")

    @app.post("/api/v1/studies/{study_id}/review")
    async def submit_review(study_id: str, request: Request,
                            user: dict = Depends(current_user)):
        if user["role"] != SPECIALIST:
            raise m.Unauthorized("only specialists submit reviews")
        try:
            body = await request.json()
        except json.JSONDecodeError:
            raise m.ValidationError("review body must be JSON") from None
        doc = service.submit_review(study_id, user["user_id"], body)
        return m.public_study_view(doc)

    return app

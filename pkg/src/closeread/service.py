"""HTTP annotation service: batches, passages, ratings, highlights.

Versioned under /v1.  Auth is a stateless signed token
"annotator.expiry.signature" (HMAC-SHA256 over "annotator.expiry"), so the
only shared state between requests is the store itself.  Annotator-facing
responses never include a passage's source: raters must stay blind to
whether text is human- or model-written.
"""

from __future__ import annotations

import hashlib
import hmac
import time

from fastapi import Depends, FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .annotation import AnnotationStore, HighlightRecord, RatingRecord
from .errors import (
    ArgumentError, AuthError, CloseReadError, ForbiddenError, NotFoundError,
    ValidationError,
)

_STATUS = {
    AuthError: 401,
    ForbiddenError: 403,
    NotFoundError: 404,
    ValidationError: 422,
    ArgumentError: 400,
}

_CODE = {
    AuthError: "auth_error",
    ForbiddenError: "forbidden",
    NotFoundError: "not_found",
    ValidationError: "validation_error",
    ArgumentError: "bad_argument",
}


def issue_token(secret: str, annotator_id: str, ttl_seconds: int = 7 * 86400,
                now: float | None = None) -> str:
    if "." in annotator_id:
        raise ArgumentError("annotator_id must not contain '.'")
    expiry = int((time.time() if now is None else now) + ttl_seconds)
    payload = f"{annotator_id}.{expiry}"
    sig = hmac.new(secret.encode(), payload.encode(), hashlib.sha256).hexdigest()
    return f"{payload}.{sig}"


def verify_token(secret: str, token: str, now: float | None = None) -> str:
    try:
        annotator_id, expiry_s, sig = token.rsplit(".", 2)
        expiry = int(expiry_s)
    except ValueError:
        raise AuthError("malformed token")
    payload = f"{annotator_id}.{expiry}"
    want = hmac.new(secret.encode(), payload.encode(), hashlib.sha256).hexdigest()
    if not hmac.compare_digest(want, sig):
        raise AuthError("bad token signature")
    if (time.time() if now is None else now) > expiry:
        raise AuthError("token expired")
    return annotator_id


class RatingIn(BaseModel):
    expr_id: str
    sensical: bool
    pragmatic: bool
    novel: bool
    rationale: str = ""
    comment: str = ""
    timestamp: str = ""


class HighlightIn(BaseModel):
    passage_id: str
    char_start: int
    char_end: int
    rationale: str
    timestamp: str = ""


def create_app(store: AnnotationStore, secret: str) -> FastAPI:
    app = FastAPI(title="closeread annotation service", version="1")

    def annotator(request: Request) -> str:
        auth = request.headers.get("authorization", "")
        if not auth.lower().startswith("bearer "):
            raise AuthError("missing bearer token")
        return verify_token(secret, auth[7:].strip())

    @app.exception_handler(CloseReadError)
    async def _handle(request: Request, exc: CloseReadError):
        status = 500
        code = "internal"
        for cls, st in _STATUS.items():
            if isinstance(exc, cls):
                status, code = st, _CODE[cls]
                break
        body = {"code": code, "message": str(exc),
                "field": getattr(exc, "field", None)}
        return JSONResponse(status_code=status, content=body)

    def batch_view(b, ann: str) -> dict:
        rated, total = store.progress(b, ann)
        return {
            "batch_id": b.batch_id,
            "passage_ids": b.passage_ids,
            "is_training": b.is_training,
            "n_expressions": total,
            "n_rated": rated,
            "progress": rated / total if total else 1.0,
            "completed": store.is_complete(b.batch_id, ann),
        }

    @app.get("/v1/batches")
    def list_batches(ann: str = Depends(annotator)):
        return {"batches": [batch_view(b, ann) for b in store.batches_for(ann)]}

    @app.get("/v1/passages/{passage_id}")
    def get_passage(passage_id: str, ann: str = Depends(annotator)):
        if not store._annotator_sees(ann, passage_id):
            raise ForbiddenError("passage is not in any of your batches")
        p = store.get_passage(passage_id)
        rated = {r.expr_id for r in store.live_ratings()
                 if r.annotator_id == ann}
        spans = [{
            "expr_id": s.expr_id,
            "char_start": s.char_start,
            "char_end": s.char_end,
            "completed": s.expr_id in rated,
        } for s in store.expressions(passage_id) if s.pre_highlighted]
        # identity of the text the offsets were computed against — no source,
        # no seed linkage: annotators stay blind
        return {
            "passage_id": p.passage_id,
            "text": p.text,
            "checksum": hashlib.sha256(p.text.encode("utf-8")).hexdigest(),
            "word_count": p.word_count,
            "spans": spans,
        }

    @app.post("/v1/ratings")
    def submit_rating(body: RatingIn, ann: str = Depends(annotator)):
        rid = store.record_rating(RatingRecord(
            ann, body.expr_id, body.sensical, body.pragmatic, body.novel,
            body.rationale, body.comment, body.timestamp))
        return {"record_id": rid}

    @app.post("/v1/highlights")
    def submit_highlight(body: HighlightIn, ann: str = Depends(annotator)):
        hid = store.record_highlight(HighlightRecord(
            ann, body.passage_id, body.char_start, body.char_end,
            body.rationale, body.timestamp))
        return {"record_id": hid}

    @app.post("/v1/batches/{batch_id}/complete")
    def complete_batch(batch_id: str, ann: str = Depends(annotator)):
        b = store.get_batch(batch_id)
        if ann not in b.assigned_annotators:
            raise ForbiddenError("batch is not assigned to you")
        if not b.is_training:
            missing = store.missing_ratings(b, ann)
            if missing:
                return {"accepted": False, "is_training": False,
                        "missing": [{"annotator_id": a, "expr_id": e}
                                    for a, e in missing]}
        store.record_completion(batch_id, ann)
        return {"accepted": True, "is_training": b.is_training, "missing": []}

    return app

"""Study documents, the status state machine, and review validation."""

from __future__ import annotations

from datetime import datetime, timezone

from ..classifier import PlaneLabel

TRAJECTORIES = ("VERTICAL", "HORIZONTAL", "DIAGONAL_1", "DIAGONAL_2")

UPLOADED = "UPLOADED"
QUEUED = "QUEUED"
PROCESSING = "PROCESSING"
PROCESSED = "PROCESSED"
FAILED = "FAILED"
REVIEWED = "REVIEWED"

STATUSES = (UPLOADED, QUEUED, PROCESSING, PROCESSED, FAILED, REVIEWED)

# Legal transitions. PROCESSING -> QUEUED is the janitor's lease-expiry
# requeue; FAILED -> QUEUED is an explicit retry.
LEGAL_TRANSITIONS = frozenset({
    (None, UPLOADED),
    (UPLOADED, QUEUED),
    (QUEUED, PROCESSING),
    (PROCESSING, PROCESSED),
    (PROCESSING, FAILED),
    (PROCESSING, QUEUED),
    (FAILED, QUEUED),
    (PROCESSED, REVIEWED),
})

CONFIRMED = "CONFIRMED"
NOT_PRESENT = "NOT_PRESENT"


class ServiceError(Exception):
    code = "service_error"


class NotFound(ServiceError):
    code = "not_found"


class Unauthorized(ServiceError):
    code = "unauthorized"


class UnknownOperator(ServiceError):
    code = "unknown_operator"


class PayloadTooLarge(ServiceError):
    code = "payload_too_large"


class InvalidState(ServiceError):
    code = "invalid_state"


class AlreadyReviewed(ServiceError):
    code = "already_reviewed"


class ValidationError(ServiceError):
    code = "validation_error"


def utcnow_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


def validate_trajectory(value: str) -> str:
    if value not in TRAJECTORIES:
        raise ValidationError(f"trajectory must be one of {TRAJECTORIES}, got {value!r}")
    return value


def validate_review(report: dict) -> dict:
    """Normalize a review submission.

    Expected shape: {"verdicts": {label: {"verdict": CONFIRMED, "count": n} |
    {"verdict": NOT_PRESENT}}, "feedback": str} with exactly the five plane
    labels present.
    """
    if not isinstance(report, dict):
        raise ValidationError("review body must be an object")
    verdicts = report.get("verdicts")
    if not isinstance(verdicts, dict):
        raise ValidationError("review must carry a verdicts object")
    want = [label.name for label in PlaneLabel.planes()]
    if sorted(verdicts) != sorted(want):
        raise ValidationError(f"verdicts must cover exactly {want}")
    normalized = {}
    for label in want:
        cell = verdicts[label]
        if not isinstance(cell, dict) or cell.get("verdict") not in (CONFIRMED, NOT_PRESENT):
            raise ValidationError(f"{label}: verdict must be {CONFIRMED} or {NOT_PRESENT}")
        if cell["verdict"] == CONFIRMED:
            count = cell.get("count")
            if not isinstance(count, int) or count < 0:
                raise ValidationError(f"{label}: {CONFIRMED} verdict needs a non-negative count")
            normalized[label] = {"verdict": CONFIRMED, "count": count}
        else:
            normalized[label] = {"verdict": NOT_PRESENT}
    feedback = report.get("feedback", "")
    if not isinstance(feedback, str):
        raise ValidationError("feedback must be a string")
    return {"verdicts": normalized, "feedback": feedback}


def public_study_view(doc: dict) -> dict:
    """A study document as served over the API (internal fields dropped)."""
    return {
        key: doc.get(key)
        for key in ("id", "operator_id", "trajectory", "video_ref", "status",
                    "result", "review", "error", "created_at", "updated_at")
    }

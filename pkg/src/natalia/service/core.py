"""The study workflow: ingest, claim, process, review, recover, audit.

All state changes are compare-and-set document mutations under the store
lock, with every status transition appended to the event log. A study is
only ever processed by the worker that won its QUEUED -> PROCESSING claim;
crashed workers are recovered by the lease janitor.
"""

from __future__ import annotations

import logging
import threading
import traceback
import uuid
from datetime import datetime, timedelta, timezone

from .. import keyframes as kf
from ..media.frames import FrameSequence
from ..media.video import decode_video, frame_png_bytes
from . import models as m
from .storage import FileBlobStore, FileDocumentStore, StorageFailure

log = logging.getLogger(__name__)

STUDIES = "studies"
NOTIFICATIONS = "notifications"
USERS = "users"

OPERATOR = "operator"
SPECIALIST = "specialist"


class StudyService:
    def __init__(self, docs: FileDocumentStore, blobs: FileBlobStore, *,
                 payload_cap: int = 256 * 1024 * 1024,
                 lease_seconds: float = 600.0,
                 selection=None):
        self.docs = docs
        self.blobs = blobs
        self.payload_cap = payload_cap
        self.lease_seconds = lease_seconds
        self.selection = selection or kf.SelectionConfig()

    # --- users -----------------------------------------------------------------

    def register_user(self, user_id: str, role: str, email: str,
                      display_name: str = "") -> None:
        if role not in (OPERATOR, SPECIALIST):
            raise m.ValidationError(f"role must be {OPERATOR} or {SPECIALIST}")
        self.docs.put(USERS, user_id, {
            "id": user_id, "role": role, "email": email, "display_name": display_name,
        })

    def get_user(self, user_id: str) -> dict | None:
        return self.docs.get(USERS, user_id)

    # --- ingest ------------------------------------------------------------------

    def create_study(self, operator_id: str, trajectory: str, payload: bytes) -> dict:
        """Store the video, persist the study, and enqueue it atomically."""
        operator = self.get_user(operator_id)
        if operator is None or operator["role"] != OPERATOR:
            raise m.UnknownOperator(f"no operator {operator_id!r}")
        m.validate_trajectory(trajectory)
        if not payload:
            raise m.PayloadTooLarge("empty upload payload")
        if len(payload) > self.payload_cap:
            raise m.PayloadTooLarge(f"payload of {len(payload)} bytes exceeds cap {self.payload_cap}")

        study_id = uuid.uuid4().hex
        video_ref = f"videos/{study_id}"
        self.blobs.put(video_ref, payload)
        now = m.utcnow_iso()
        doc = {
            "id": study_id,
            "operator_id": operator_id,
            "trajectory": trajectory,
            "video_ref": video_ref,
            "status": m.UPLOADED,
            "result": None,
            "review": None,
            "error": None,
            "attempts": 0,
            "created_at": now,
            "updated_at": now,
        }

        def ingest():
            try:
                self.docs.insert(STUDIES, study_id, doc)
            except StorageFailure:
                self.blobs.delete(video_ref)
                raise
            self.docs.append_event(study_id, None, m.UPLOADED, actor=operator_id)
            self._transition(doc, m.UPLOADED, m.QUEUED, actor=operator_id)
            return self.docs.get(STUDIES, study_id)

        return self.docs.transact(ingest)

    # --- state machine helpers ------------------------------------------------------

    def _transition(self, doc: dict, expect: str, to: str, actor: str, **updates) -> dict:
        """CAS transition; raises InvalidState when the status moved under us."""
        def apply(current: dict) -> dict:
            if current["status"] != expect:
                raise m.InvalidState(
                    f"study {current['id']} is {current['status']}, expected {expect}"
                )
            current = dict(current)
            current["status"] = to
            current["updated_at"] = m.utcnow_iso()
            current.update(updates)
            return current

        def run():
            new_doc = self.docs.mutate(STUDIES, doc["id"], apply)
            self.docs.append_event(doc["id"], expect, to, actor=actor)
            return new_doc

        return self.docs.transact(run)

    # --- worker ------------------------------------------------------------------------

    def claim_next(self, worker_id: str) -> dict | None:
        """Atomically claim the oldest QUEUED study for one worker."""
        def run():
            queued = [d for d in self.docs.all_docs(STUDIES) if d["status"] == m.QUEUED]
            if not queued:
                return None
            target = min(queued, key=lambda d: (d["created_at"], d["id"]))
            lease = (datetime.now(timezone.utc)
                     + timedelta(seconds=self.lease_seconds)).isoformat()
            return self._transition(target, m.QUEUED, m.PROCESSING, actor=worker_id,
                                    worker_id=worker_id, lease_expires_at=lease)

        return self.docs.transact(run)

    def process_claimed(self, doc: dict, backend, worker_id: str) -> dict:
        """Run the pipeline for a claimed study; record success or failure."""
        study_id = doc["id"]
        try:
            payload = self.blobs.get(doc["video_ref"])
            video = decode_video(payload, source_id=study_id)
            result = kf.process_sweep(video, backend, self.selection)
            self._store_keyframe_images(study_id, video, result)
            updated = self._transition(
                doc, m.PROCESSING, m.PROCESSED, actor=worker_id,
                result=result.to_dict(), error=None,
            )
            log.info("study %s processed: %s", study_id, result.label_counts)
            return updated
        except m.InvalidState:
            raise
        except Exception as exc:
            diagnostic = {"code": type(exc).__name__, "message": str(exc)}
            log.warning("study %s failed: %s", study_id, diagnostic, exc_info=False)
            return self._transition(
                doc, m.PROCESSING, m.FAILED, actor=worker_id,
                error=diagnostic,
                attempts=doc.get("attempts", 0) + 1,
            )

    def _store_keyframe_images(self, study_id: str, video: FrameSequence,
                               result: kf.StudyResult) -> None:
        # rendered from the decoded native-resolution frames
        for keyframe in result.keyframes:
            frame = video[keyframe.frame_index]
            self.blobs.put(f"keyframes/{study_id}/{keyframe.frame_index}.png",
                           frame_png_bytes(frame))

    def retry_study(self, study_id: str, actor: str) -> dict:
        doc = self._require(study_id)
        if doc["status"] != m.FAILED:
            raise m.InvalidState(f"only FAILED studies can be retried; {study_id} is {doc['status']}")
        return self._transition(doc, m.FAILED, m.QUEUED, actor=actor,
                                worker_id=None, lease_expires_at=None)

    def requeue_expired_leases(self, now: datetime | None = None) -> list[str]:
        """Janitor: requeue PROCESSING studies whose lease has expired."""
        now = now or datetime.now(timezone.utc)

        def run():
            requeued = []
            for doc in self.docs.all_docs(STUDIES):
                if doc["status"] != m.PROCESSING:
                    continue
                lease = doc.get("lease_expires_at")
                if lease and datetime.fromisoformat(lease) < now:
                    self._transition(doc, m.PROCESSING, m.QUEUED, actor="janitor",
                                     worker_id=None, lease_expires_at=None,
                                     attempts=doc.get("attempts", 0) + 1)
                    requeued.append(doc["id"])
            return requeued

        return self.docs.transact(run)

    # --- review -------------------------------------------------------------------------

    def submit_review(self, study_id: str, reviewer_id: str, report: dict) -> dict:
        """Persist a specialist verdict and create exactly one notification."""
        reviewer = self.get_user(reviewer_id)
        if reviewer is None or reviewer["role"] != SPECIALIST:
            raise m.Unauthorized(f"{reviewer_id!r} is not a registered specialist")
        normalized = m.validate_review(report)

        def run():
            doc = self._require(study_id)
            if doc["status"] == m.REVIEWED:
                raise m.AlreadyReviewed(f"study {study_id} already reviewed")
            if doc["status"] != m.PROCESSED:
                raise m.InvalidState(
                    f"study {study_id} is {doc['status']}; reviews need PROCESSED"
                )
            review = {
                "reviewer_id": reviewer_id,
                "verdicts": normalized["verdicts"],
                "feedback": normalized["feedback"],
                "reviewed_at": m.utcnow_iso(),
            }
            updated = self._transition(doc, m.PROCESSED, m.REVIEWED,
                                       actor=reviewer_id, review=review)
            operator = self.get_user(doc["operator_id"]) or {}
            self._create_notification(updated, operator.get("email", ""), review)
            return updated

        return self.docs.transact(run)

    def _create_notification(self, study: dict, recipient: str, review: dict) -> None:
        notification_id = uuid.uuid4().hex
        self.docs.insert(NOTIFICATIONS, notification_id, {
            "id": notification_id,
            "recipient": recipient,
            "study_id": study["id"],
            "body": render_feedback(study, review),
            "delivery_state": "PENDING",
            "attempts": 0,
            "next_attempt_at": None,
            "last_error": None,
            "created_at": m.utcnow_iso(),
        })

    # --- queries ----------------------------------------------------------------------------

    def _require(self, study_id: str) -> dict:
        doc = self.docs.get(STUDIES, study_id)
        if doc is None:
            raise m.NotFound(f"study {study_id!r} not found")
        return doc

    def get_study(self, study_id: str) -> dict:
        return self._require(study_id)

    def list_studies(self, status: str | None = None, operator: str | None = None,
                     pending_review: bool = False) -> list[dict]:
        docs = self.docs.all_docs(STUDIES)
        if status is not None:
            docs = [d for d in docs if d["status"] == status]
        if operator is not None:
            docs = [d for d in docs if d["operator_id"] == operator]
        if pending_review:
            docs = [d for d in docs if d["status"] == m.PROCESSED]
        return sorted(docs, key=lambda d: (d["created_at"], d["id"]), reverse=True)

    def download_video(self, study_id: str) -> bytes:
        doc = self._require(study_id)
        return self.blobs.get(doc["video_ref"])

    def get_keyframe_image(self, study_id: str, frame_index: int) -> bytes:
        doc = self._require(study_id)
        key = f"keyframes/{study_id}/{frame_index}.png"
        if doc["status"] not in (m.PROCESSED, m.REVIEWED) or not self.blobs.exists(key):
            raise m.NotFound(f"study {study_id} has no key frame {frame_index}")
        return self.blobs.get(key)

    def queue_depth(self) -> int:
        return sum(1 for d in self.docs.all_docs(STUDIES) if d["status"] == m.QUEUED)

    # --- audits ------------------------------------------------------------------------------

    def audit_blobs(self) -> dict:
        """Cross-check the blob store against study documents."""
        studies = self.docs.all_docs(STUDIES)
        referenced = set()
        missing = []
        for doc in studies:
            referenced.add(doc["video_ref"])
            if not self.blobs.exists(doc["video_ref"]):
                missing.append(doc["video_ref"])
            result = doc.get("result")
            if result:
                for entry in result["keyframes"]:
                    referenced.add(f"keyframes/{doc['id']}/{entry['frame_index']}.png")
        orphans = [key for key in self.blobs.keys() if key not in referenced]
        return {"orphan_blobs": orphans, "missing_blobs": missing}


def render_feedback(study: dict, review: dict) -> str:
    """The notification body shown to the operator."""
    lines = [
        f"Study {study['id']} ({study['trajectory']} sweep) has been reviewed.",
        "",
        "Plane verdicts:",
    ]
    for label, cell in review["verdicts"].items():
        if cell["verdict"] == m.CONFIRMED:
            lines.append(f"  {label}: confirmed ({cell['count']} frame(s))")
        else:
            lines.append(f"  {label}: not present")
    feedback = review.get("feedback", "")
    lines += ["", "Specialist feedback:", feedback or "(none)"]
    return "\n".join(lines) + "\n"


class Janitor(threading.Thread):
    """Periodically requeues PROCESSING studies whose worker lease expired."""

    def __init__(self, service: StudyService, interval: float = 30.0):
        super().__init__(name="lease-janitor", daemon=True)
        self.service = service
        self.interval = interval
        self._halt = threading.Event()

    def run(self) -> None:
        while not self._halt.is_set():
            try:
                requeued = self.service.requeue_expired_leases()
                if requeued:
                    log.warning("janitor requeued %s", requeued)
            except Exception:
                log.exception("janitor pass failed")
            self._halt.wait(self.interval)

    def stop(self, timeout: float = 10.0) -> None:
        self._halt.set()
        self.join(timeout=timeout)


class Worker(threading.Thread):
    """Claims QUEUED studies in a loop and processes them with its backend."""

    def __init__(self, service: StudyService, backend, worker_id: str,
                 poll_interval: float = 0.2):
        super().__init__(name=worker_id, daemon=True)
        self.service = service
        self.backend = backend
        self.worker_id = worker_id
        self.poll_interval = poll_interval
        self._halt = threading.Event()

    def run(self) -> None:
        while not self._halt.is_set():
            try:
                claimed = self.service.claim_next(self.worker_id)
                if claimed is None:
                    self._halt.wait(self.poll_interval)
                    continue
                self.service.process_claimed(claimed, self.backend, self.worker_id)
            except Exception:
                log.error("worker %s: unexpected error\n%s", self.worker_id,
                          traceback.format_exc())
                self._halt.wait(self.poll_interval)

    def stop(self, timeout: float = 10.0) -> None:
        self._halt.set()
        self.join(timeout=timeout)

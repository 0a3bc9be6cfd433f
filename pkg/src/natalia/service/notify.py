"""Notification delivery with retry backoff.

The dispatcher polls PENDING notifications and hands them to a sender:
either real SMTP or, when no SMTP settings are configured, a file outbox
that writes one message file per notification (the test path).
"""

from __future__ import annotations

import logging
import smtplib
import threading
from datetime import datetime, timedelta, timezone
from email.message import EmailMessage
from pathlib import Path

from .core import NOTIFICATIONS, StudyService

log = logging.getLogger(__name__)

PENDING, SENT, FAILED = "PENDING", "SENT", "FAILED"

MAX_ATTEMPTS = 5
BACKOFF_BASE_SECONDS = 1.0


class FileOutboxSender:
    """Writes each notification to <outbox>/<notification_id>.eml."""

    def __init__(self, outbox: str | Path):
        self.outbox = Path(outbox)
        self.outbox.mkdir(parents=True, exist_ok=True)

    def send(self, notification: dict) -> None:
        body = (f"To: {notification['recipient']}\n"
                f"Subject: Study {notification['study_id']} reviewed\n\n"
                f"{notification['body']}")
        (self.outbox / f"{notification['id']}.eml").write_text(body, encoding="utf-8")


class SmtpSender:
    def __init__(self, host: str, port: int, sender: str,
                 username: str | None = None, password: str | None = None,
                 use_tls: bool = True):
        self.host = host
        self.port = port
        self.sender = sender
        self.username = username
        self.password = password
        self.use_tls = use_tls

    def send(self, notification: dict) -> None:
        msg = EmailMessage()
        msg["From"] = self.sender
        msg["To"] = notification["recipient"]
        msg["Subject"] = f"Study {notification['study_id']} reviewed"
        msg.set_content(notification["body"])
        with smtplib.SMTP(self.host, self.port, timeout=30) as smtp:
            if self.use_tls:
                smtp.starttls()
            if self.username:
                smtp.login(self.username, self.password or "")
            smtp.send_message(msg)


class NotificationDispatcher(threading.Thread):
    """Delivers PENDING notifications; transient failures back off and retry."""

    def __init__(self, service: StudyService, sender, poll_interval: float = 0.2,
                 max_attempts: int = MAX_ATTEMPTS,
                 backoff_base: float = BACKOFF_BASE_SECONDS):
        super().__init__(name="notification-dispatcher", daemon=True)
        self.service = service
        self.sender = sender
        self.poll_interval = poll_interval
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self._halt = threading.Event()

    def dispatch_once(self, now: datetime | None = None) -> int:
        """One delivery pass; returns how many notifications were attempted."""
        now = now or datetime.now(timezone.utc)
        attempted = 0
        for doc in self.service.docs.all_docs(NOTIFICATIONS):
            if doc["delivery_state"] != PENDING:
                continue
            due = doc.get("next_attempt_at")
            if due and datetime.fromisoformat(due) > now:
                continue
            attempted += 1
            try:
                self.sender.send(doc)
            except Exception as exc:
                self._record_failure(doc, exc, now)
            else:
                self.service.docs.mutate(
                    NOTIFICATIONS, doc["id"],
                    lambda d: {**d, "delivery_state": SENT, "attempts": d["attempts"] + 1,
                               "last_error": None},
                )
        return attempted

    def _record_failure(self, doc: dict, exc: Exception, now: datetime) -> None:
        attempts = doc["attempts"] + 1
        if attempts >= self.max_attempts:
            state, next_at = FAILED, None
            log.error("notification %s failed permanently: %s", doc["id"], exc)
        else:
            delay = self.backoff_base * (2 ** (attempts - 1))
            state, next_at = PENDING, (now + timedelta(seconds=delay)).isoformat()
            log.warning("notification %s attempt %d failed (%s); retry at %s",
                        doc["id"], attempts, exc, next_at)
        self.service.docs.mutate(
            NOTIFICATIONS, doc["id"],
            lambda d: {**d, "delivery_state": state, "attempts": attempts,
                       "last_error": str(exc), "next_attempt_at": next_at},
        )

    def run(self) -> None:
        while not self._halt.is_set():
            try:
                self.dispatch_once()
            except Exception:
                log.exception("dispatcher pass failed")
            self._halt.wait(self.poll_interval)

    def stop(self, timeout: float = 10.0) -> None:
        self._halt.set()
        self.join(timeout=timeout)

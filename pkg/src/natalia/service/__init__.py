"""Asynchronous study-review service: ingest, workers, reviews, notifications."""

from . import models
from .api import create_app
from .config import ServiceConfig, load_credentials
from .core import OPERATOR, SPECIALIST, Janitor, StudyService, Worker, render_feedback
from .notify import FileOutboxSender, NotificationDispatcher, SmtpSender
from .storage import FileBlobStore, FileDocumentStore, StorageFailure

__all__ = [
    "FileBlobStore",
    "FileDocumentStore",
    "FileOutboxSender",
    "Janitor",
    "NotificationDispatcher",
    "OPERATOR",
    "SPECIALIST",
    "ServiceConfig",
    "SmtpSender",
    "StorageFailure",
    "StudyService",
    "Worker",
    "create_app",
    "load_credentials",
    "models",
    "render_feedback",
]

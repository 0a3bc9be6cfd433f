"""Service configuration from environment variables.

NATALIA_BIND           host:port to serve on (default 127.0.0.1:8000)
NATALIA_DATA_DIR       storage root; documents, blobs and the outbox live here
NATALIA_DOCSTORE       document-store locator (default file:<data>/docstore)
NATALIA_MODEL          backend descriptor: mock | mock:<W>x<H> | model:<path>
NATALIA_WORKERS        worker count (default 2)
NATALIA_CREDENTIALS    path to the static credentials JSON file
NATALIA_PAYLOAD_CAP    max upload bytes (default 268435456)
NATALIA_LEASE_SECONDS  worker lease before janitor requeue (default 600)
NATALIA_SMTP_HOST/_PORT/_FROM/_USER/_PASSWORD
                       SMTP delivery; when NATALIA_SMTP_HOST is absent the
                       file outbox at <data>/outbox is used instead
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path


@dataclass
class ServiceConfig:
    bind_host: str = "127.0.0.1"
    bind_port: int = 8000
    data_dir: Path = Path("./natalia-data")
    docstore: str = ""
    model: str = "mock"
    workers: int = 2
    credentials_path: Path | None = None
    payload_cap: int = 256 * 1024 * 1024
    lease_seconds: float = 600.0
    smtp: dict | None = None

    @classmethod
    def from_env(cls, env: dict | None = None) -> "ServiceConfig":
        env = dict(os.environ if env is None else env)
        cfg = cls()
        bind = env.get("NATALIA_BIND")
        if bind:
            host, _, port = bind.rpartition(":")
            cfg.bind_host = host or "127.0.0.1"
            cfg.bind_port = int(port)
        cfg.data_dir = Path(env.get("NATALIA_DATA_DIR", str(cfg.data_dir)))
        cfg.docstore = env.get("NATALIA_DOCSTORE", f"file:{cfg.data_dir / 'docstore'}")
        cfg.model = env.get("NATALIA_MODEL", cfg.model)
        cfg.workers = int(env.get("NATALIA_WORKERS", cfg.workers))
        creds = env.get("NATALIA_CREDENTIALS")
        cfg.credentials_path = Path(creds) if creds else None
        cfg.payload_cap = int(env.get("NATALIA_PAYLOAD_CAP", cfg.payload_cap))
        cfg.lease_seconds = float(env.get("NATALIA_LEASE_SECONDS", cfg.lease_seconds))
        if env.get("NATALIA_SMTP_HOST"):
            cfg.smtp = {
                "host": env["NATALIA_SMTP_HOST"],
                "port": int(env.get("NATALIA_SMTP_PORT", 587)),
                "sender": env.get("NATALIA_SMTP_FROM", "natalia@localhost"),
                "username": env.get("NATALIA_SMTP_USER"),
                "password": env.get("NATALIA_SMTP_PASSWORD"),
            }
        return cfg

    def docstore_path(self) -> Path:
        if not self.docstore.startswith("file:"):
            raise ValueError(f"only file: document stores ship here, got {self.docstore!r}")
        return Path(self.docstore[len("file:"):])


def load_credentials(path: str | Path) -> list[dict]:
    """Static credential file: [{token, user_id, role, email, display_name?}]."""
    entries = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(entries, list):
        raise ValueError("credentials file must hold a list of entries")
    for pos, entry in enumerate(entries):
        for key in ("token", "user_id", "role", "email"):
            if key not in entry:
                raise ValueError(f"credentials[{pos}]: missing {key!r}")
    return entries

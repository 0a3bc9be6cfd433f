"""Reference persistence: a file-backed document store and blob store.

Both implement narrow interfaces so a production adapter can replace them.
The reference document store serializes every document as one JSON file,
guards all mutations with a process-wide reentrant lock (the service runs
single-process), and appends every study status change to an event log that
the state-machine tests audit.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path


class StorageFailure(Exception):
    pass


class DuplicateId(StorageFailure):
    pass


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


class FileDocumentStore:
    """JSON-file-per-document store with an append-only study event log.

    Files are the durable source of truth; a write-through cache of the
    serialized documents keeps repeated scans (worker claims) off the disk.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.lock = threading.RLock()
        self._cache: dict[str, dict[str, str]] = {}
        self._scanned: set[str] = set()
        self._events_path = self.root / "events.jsonl"
        self._event_seq = sum(1 for _ in self._events_path.open()) if self._events_path.exists() else 0

    def _doc_path(self, collection: str, doc_id: str) -> Path:
        if "/" in doc_id or doc_id in ("", ".", ".."):
            raise StorageFailure(f"invalid document id {doc_id!r}")
        return self.root / collection / f"{doc_id}.json"

    def _scan(self, collection: str) -> dict[str, str]:
        cache = self._cache.setdefault(collection, {})
        if collection not in self._scanned:
            folder = self.root / collection
            if folder.is_dir():
                for path in folder.glob("*.json"):
                    cache.setdefault(path.stem, path.read_text(encoding="utf-8"))
            self._scanned.add(collection)
        return cache

    def _write(self, collection: str, doc_id: str, doc: dict) -> None:
        path = self._doc_path(collection, doc_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        raw = json.dumps(doc, sort_keys=True)
        _atomic_write(path, raw.encode("utf-8"))
        self._cache.setdefault(collection, {})[doc_id] = raw

    def insert(self, collection: str, doc_id: str, doc: dict) -> None:
        with self.lock:
            if self.get(collection, doc_id) is not None:
                raise DuplicateId(f"{collection}/{doc_id} already exists")
            self._write(collection, doc_id, doc)

    def put(self, collection: str, doc_id: str, doc: dict) -> None:
        with self.lock:
            self._write(collection, doc_id, doc)

    def get(self, collection: str, doc_id: str) -> dict | None:
        with self.lock:
            cached = self._cache.get(collection, {}).get(doc_id)
            if cached is None:
                path = self._doc_path(collection, doc_id)
                if not path.exists():
                    return None
                cached = path.read_text(encoding="utf-8")
                self._cache.setdefault(collection, {})[doc_id] = cached
            return json.loads(cached)

    def delete(self, collection: str, doc_id: str) -> None:
        with self.lock:
            self._doc_path(collection, doc_id).unlink(missing_ok=True)
            self._cache.get(collection, {}).pop(doc_id, None)

    def all_docs(self, collection: str) -> list[dict]:
        with self.lock:
            cache = self._scan(collection)
            return [json.loads(cache[doc_id]) for doc_id in sorted(cache)]

    def mutate(self, collection: str, doc_id: str, fn) -> dict:
        """Atomic read-modify-write; fn receives the doc and returns the new one."""
        with self.lock:
            doc = self.get(collection, doc_id)
            if doc is None:
                raise StorageFailure(f"{collection}/{doc_id} does not exist")
            new_doc = fn(doc)
            self.put(collection, doc_id, new_doc)
            return new_doc

    def transact(self, fn):
        """Run fn() under the store-wide lock (multi-document atomicity)."""
        with self.lock:
            return fn()

    # --- study event log -----------------------------------------------------

    def append_event(self, study_id: str, from_status: str | None, to_status: str,
                     actor: str) -> None:
        with self.lock:
            self._event_seq += 1
            record = {
                "seq": self._event_seq,
                "study_id": study_id,
                "from": from_status,
                "to": to_status,
                "actor": actor,
            }
            with self._events_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, sort_keys=True) + "\n")

    def read_events(self) -> list[dict]:
        with self.lock:
            if not self._events_path.exists():
                return []
            return [json.loads(line) for line in self._events_path.read_text(encoding="utf-8").splitlines()]


class FileBlobStore:
    """Flat keyed blob storage under one directory tree."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, key: str) -> Path:
        clean = Path(key)
        if clean.is_absolute() or ".." in clean.parts:
            raise StorageFailure(f"invalid blob key {key!r}")
        return self.root / clean

    def put(self, key: str, data: bytes) -> None:
        path = self._path(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        _atomic_write(path, data)

    def get(self, key: str) -> bytes:
        path = self._path(key)
        if not path.exists():
            raise StorageFailure(f"blob {key!r} not found")
        return path.read_bytes()

    def exists(self, key: str) -> bool:
        return self._path(key).exists()

    def delete(self, key: str) -> None:
        self._path(key).unlink(missing_ok=True)

    def keys(self) -> list[str]:
        return sorted(
            str(p.relative_to(self.root))
            for p in self.root.rglob("*")
            if p.is_file() and not p.name.endswith(".tmp")
        )

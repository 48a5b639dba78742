"""Persistent store for norm/coset enumeration results, one JSON file per key."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import threading
from pathlib import Path


def key_digest(parts: tuple) -> str:
    return hashlib.sha256(repr(parts).encode()).hexdigest()[:40]


class EnumerationCache:
    """In-memory cache with an optional on-disk mirror.

    Files are written to a temporary name and renamed into place, so concurrent
    writers never expose a partial record.
    """

    def __init__(self, directory: str | os.PathLike | None = None):
        self.directory = Path(directory) if directory is not None else None
        if self.directory is not None:
            self.directory.mkdir(parents=True, exist_ok=True)
        self._mem: dict[str, dict] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0
        self.writes = 0

    def _path(self, digest: str) -> Path:
        assert self.directory is not None
        return self.directory / f"{digest}.json"

    def get(self, parts: tuple) -> dict | None:
        digest = key_digest(parts)
        with self._lock:
            rec = self._mem.get(digest)
        if rec is None and self.directory is not None:
            path = self._path(digest)
            if path.exists():
                with open(path, encoding="utf-8") as fh:
                    rec = json.load(fh)
                if rec.get("key") != repr(parts):
                    rec = None
                else:
                    with self._lock:
                        self._mem[digest] = rec
        with self._lock:
            if rec is None:
                self.misses += 1
            else:
                self.hits += 1
        return rec

    def put(self, parts: tuple, record: dict) -> None:
        digest = key_digest(parts)
        record = dict(record, key=repr(parts))
        with self._lock:
            self._mem[digest] = record
            self.writes += 1
        if self.directory is None:
            return
        fd, tmp = tempfile.mkstemp(dir=self.directory, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(record, fh, sort_keys=True)
            os.replace(tmp, self._path(digest))
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def stats(self) -> dict:
        return {"hits": self.hits, "misses": self.misses, "writes": self.writes,
                "directory": str(self.directory) if self.directory else None}

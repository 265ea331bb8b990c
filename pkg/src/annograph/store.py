"""Embedded document store backing the service's three collections.

Records are plain JSON-serializable dicts keyed by collection and id.  With
a data directory the store writes one JSON file per collection on every
mutation (atomically, via rename), so a restart resumes where it left off.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Callable, Optional, Union

COLLECTIONS = ("users", "projects", "texts")
_ID_PREFIX = {"users": "u", "projects": "p", "texts": "t"}


class DocumentStore:
    def __init__(self, data_dir: Union[str, Path, None] = None):
        self.data_dir = Path(data_dir) if data_dir else None
        self.lock = threading.RLock()
        self._data: dict[str, dict[str, dict]] = {name: {} for name in COLLECTIONS}
        self._counters: dict[str, int] = {name: 0 for name in COLLECTIONS}
        if self.data_dir:
            self.data_dir.mkdir(parents=True, exist_ok=True)
            self._load()

    def _load(self) -> None:
        for name in COLLECTIONS:
            path = self.data_dir / f"{name}.json"
            if path.is_file():
                payload = json.loads(path.read_text(encoding="utf-8"))
                self._data[name] = payload.get("records", {})
                self._counters[name] = payload.get("counter", 0)

    def _flush(self, name: str) -> None:
        if not self.data_dir:
            return
        path = self.data_dir / f"{name}.json"
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(
            json.dumps({"counter": self._counters[name], "records": self._data[name]},
                       ensure_ascii=False),
            encoding="utf-8",
        )
        tmp.replace(path)

    def insert(self, collection: str, record: dict, record_id: Optional[str] = None) -> str:
        with self.lock:
            if record_id is None:
                self._counters[collection] += 1
                record_id = f"{_ID_PREFIX[collection]}{self._counters[collection]:06d}"
            elif record_id in self._data[collection]:
                raise KeyError(f"{collection} id {record_id!r} already exists")
            record["_id"] = record_id
            self._data[collection][record_id] = record
            self._flush(collection)
            return record_id

    def get(self, collection: str, record_id: str) -> Optional[dict]:
        with self.lock:
            return self._data[collection].get(record_id)

    def put(self, collection: str, record_id: str, record: dict) -> None:
        with self.lock:
            record["_id"] = record_id
            self._data[collection][record_id] = record
            self._flush(collection)

    def delete(self, collection: str, record_id: str) -> None:
        with self.lock:
            self._data[collection].pop(record_id, None)
            self._flush(collection)

    def all(self, collection: str) -> list[dict]:
        with self.lock:
            return list(self._data[collection].values())

    def find(self, collection: str, predicate: Callable[[dict], bool]) -> list[dict]:
        with self.lock:
            return [record for record in self._data[collection].values() if predicate(record)]

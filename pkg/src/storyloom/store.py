"""Plain-file persistence with monotone ids and atomic commits.

Layout: base/<kind>/<id>.json for records, base/index.json for the id
counters and tombstones.  Every write goes to a temp file first and is
renamed into place, so a crash at any point leaves either the old state or
the new state, never a torn file.  Ids are never reused, deletions leave a
tombstone, and reopening reconciles the counters against the files that
actually made it to disk.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path
from typing import Callable, Union

from .errors import (
    NotFoundError,
    StoreCorruptError,
    UnknownPatternError,
    ValidationFailure,
)
from .patterns import (
    GenrePattern,
    builtin_pattern,
    builtin_patterns,
    pattern_from_dict,
    pattern_to_dict,
)

KIND_PATTERN = "pattern"
KIND_EXEMPLAR_SET = "exemplar-set"
KIND_SESSION = "session"
KIND_STORY = "story"
KINDS = (KIND_PATTERN, KIND_EXEMPLAR_SET, KIND_SESSION, KIND_STORY)

# commit seam: tests swap this out to simulate a crash mid-commit
_commit = os.replace


def _atomic_write(path: Path, payload: dict) -> None:
    text = json.dumps(payload, ensure_ascii=False, indent=2)
    tmp = path.with_suffix(".json.tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text + "\n")
        fh.flush()
        os.fsync(fh.fileno())
    _commit(tmp, path)


class Store:
    """File-backed record store for one base directory."""

    def __init__(self, base: Union[str, Path]):
        self.base = Path(base)
        self._lock = threading.RLock()
        self.base.mkdir(parents=True, exist_ok=True)
        for leftover in self.base.glob("**/*.tmp"):
            leftover.unlink()
        self._next: dict[str, int] = {kind: 1 for kind in KINDS}
        self._deleted: dict[str, set[int]] = {kind: set() for kind in KINDS}
        self._load_index()
        self._reconcile()

    # --- index handling ---

    @property
    def _index_path(self) -> Path:
        return self.base / "index.json"

    def _load_index(self) -> None:
        if not self._index_path.exists():
            return
        try:
            with open(self._index_path, encoding="utf-8") as fh:
                raw = json.load(fh)
            for kind in KINDS:
                self._next[kind] = int(raw.get("next", {}).get(kind, 1))
                self._deleted[kind] = {
                    int(i) for i in raw.get("deleted", {}).get(kind, [])
                }
        except (ValueError, TypeError, AttributeError) as exc:
            raise StoreCorruptError(
                f"unreadable store index {self._index_path}: {exc};"
                " repair hint: delete index.json to rebuild counters from"
                " the record files (tombstones will be lost)",
                details={"path": str(self._index_path)},
            ) from exc

    def _save_index(self) -> None:
        _atomic_write(
            self._index_path,
            {
                "next": dict(self._next),
                "deleted": {
                    kind: sorted(ids) for kind, ids in self._deleted.items()
                },
            },
        )

    def _reconcile(self) -> None:
        # a crash can commit a record file before the index bump lands;
        # trust whichever is further ahead
        for kind in KINDS:
            floor = self._next[kind]
            for record_id in self._scan(kind):
                floor = max(floor, record_id + 1)
            for record_id in self._deleted[kind]:
                floor = max(floor, record_id + 1)
            self._next[kind] = floor

    # --- record files ---

    def _kind_dir(self, kind: str) -> Path:
        if kind not in KINDS:
            raise ValidationFailure(f"unknown record kind {kind!r}")
        return self.base / kind

    def _record_path(self, kind: str, record_id: int) -> Path:
        return self._kind_dir(kind) / f"{record_id}.json"

    def _scan(self, kind: str) -> list[int]:
        directory = self._kind_dir(kind)
        if not directory.exists():
            return []
        ids = []
        for path in directory.glob("*.json"):
            if path.stem.isdigit():
                ids.append(int(path.stem))
        return sorted(ids)

    # --- public operations ---

    def put(self, kind: str, record: dict) -> int:
        return self.put_with(kind, lambda record_id: record)

    def put_with(self, kind: str, make_record: Callable[[int], dict]) -> int:
        """Assign the next id, let the caller shape the record around it,
        and commit record then index."""
        with self._lock:
            self._kind_dir(kind)
            record_id = self._next[kind]
            record = make_record(record_id)
            if not isinstance(record, dict):
                raise ValidationFailure(
                    f"store records must be dicts, got {type(record).__name__}"
                )
            directory = self._kind_dir(kind)
            directory.mkdir(parents=True, exist_ok=True)
            try:
                _atomic_write(self._record_path(kind, record_id), record)
            except TypeError as exc:
                raise ValidationFailure(
                    f"record is not serializable: {exc}"
                ) from exc
            self._next[kind] = record_id + 1
            self._save_index()
            return record_id

    def get(self, kind: str, record_id: int) -> dict:
        path = self._record_path(kind, record_id)
        with self._lock:
            if record_id in self._deleted[kind] or not path.exists():
                raise NotFoundError(
                    f"no {kind} record {record_id}",
                    details={"kind": kind, "id": record_id},
                )
            try:
                with open(path, encoding="utf-8") as fh:
                    return json.load(fh)
            except ValueError as exc:
                raise StoreCorruptError(
                    f"unreadable {kind} record {path}: {exc};"
                    " repair hint: restore the file from a backup, or delete"
                    " it and remove the id from any references",
                    details={"path": str(path)},
                ) from exc

    def list(self, kind: str) -> list[int]:
        with self._lock:
            return [
                record_id
                for record_id in self._scan(kind)
                if record_id not in self._deleted[kind]
            ]

    def delete(self, kind: str, record_id: int) -> None:
        with self._lock:
            path = self._record_path(kind, record_id)
            if record_id in self._deleted[kind] or not path.exists():
                raise NotFoundError(
                    f"no {kind} record {record_id}",
                    details={"kind": kind, "id": record_id},
                )
            path.unlink()
            self._deleted[kind].add(record_id)
            self._save_index()


class MemoryStore(Store):
    """Store semantics without the filesystem; for tests and model checks."""

    def __init__(self):
        self._lock = threading.RLock()
        self._next = {kind: 1 for kind in KINDS}
        self._deleted = {kind: set() for kind in KINDS}
        self._records: dict[str, dict[int, str]] = {kind: {} for kind in KINDS}

    def _check_kind(self, kind: str) -> None:
        if kind not in KINDS:
            raise ValidationFailure(f"unknown record kind {kind!r}")

    def put_with(self, kind: str, make_record: Callable[[int], dict]) -> int:
        with self._lock:
            self._check_kind(kind)
            record_id = self._next[kind]
            record = make_record(record_id)
            if not isinstance(record, dict):
                raise ValidationFailure(
                    f"store records must be dicts, got {type(record).__name__}"
                )
            try:
                text = json.dumps(record, ensure_ascii=False)
            except TypeError as exc:
                raise ValidationFailure(
                    f"record is not serializable: {exc}"
                ) from exc
            self._records[kind][record_id] = text
            self._next[kind] = record_id + 1
            return record_id

    def get(self, kind: str, record_id: int) -> dict:
        with self._lock:
            self._check_kind(kind)
            if record_id not in self._records[kind]:
                raise NotFoundError(
                    f"no {kind} record {record_id}",
                    details={"kind": kind, "id": record_id},
                )
            return json.loads(self._records[kind][record_id])

    def list(self, kind: str) -> list[int]:
        with self._lock:
            self._check_kind(kind)
            return sorted(self._records[kind])

    def delete(self, kind: str, record_id: int) -> None:
        with self._lock:
            self._check_kind(kind)
            if record_id not in self._records[kind]:
                raise NotFoundError(
                    f"no {kind} record {record_id}",
                    details={"kind": kind, "id": record_id},
                )
            del self._records[kind][record_id]
            self._deleted[kind].add(record_id)


class PatternCatalog:
    """Unified pattern addressing over builtins and the store.

    Builtins keep their "builtin-*" ids and cannot be deleted; stored
    patterns are addressed by their numeric store id rendered as text.
    """

    def __init__(self, store: Store):
        self.store = store

    def list(self) -> list[GenrePattern]:
        stored = [
            self.get(str(record_id))
            for record_id in self.store.list(KIND_PATTERN)
        ]
        return builtin_patterns() + stored

    def get(self, pattern_id: str) -> GenrePattern:
        builtin = builtin_pattern(pattern_id)
        if builtin is not None:
            return builtin
        if pattern_id.isdigit():
            try:
                record = self.store.get(KIND_PATTERN, int(pattern_id))
            except NotFoundError:
                pass
            else:
                return pattern_from_dict(record)
        raise UnknownPatternError(
            f"no pattern with id {pattern_id!r}",
            details={"pattern_id": pattern_id},
        )

    def add(self, pattern: GenrePattern) -> GenrePattern:
        stored = {}

        def shape(record_id: int) -> dict:
            record = pattern_to_dict(pattern)
            record["id"] = str(record_id)
            stored.update(record)
            return record

        self.store.put_with(KIND_PATTERN, shape)
        return pattern_from_dict(stored)

    def delete(self, pattern_id: str) -> None:
        if builtin_pattern(pattern_id) is not None:
            raise ValidationFailure(
                f"builtin pattern {pattern_id!r} cannot be deleted"
            )
        if not pattern_id.isdigit():
            raise NotFoundError(f"no pattern with id {pattern_id!r}")
        self.store.delete(KIND_PATTERN, int(pattern_id))

"""Journaled session state: the evolving corpus plus its mutation history.

The session keeps an append-only ``archive`` of every record it has ever
ingested; the journal stores only ids. Folding the journal over the archive
reproduces the live corpus exactly, which is what makes undo and crash
recovery trivial: drop the last entry (or load a file) and replay.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

from distillery.config import SessionConfig
from distillery.errors import (
    CorePaperError,
    DuplicatePaperError,
    EmptyCoreError,
    EmptyJournalError,
    InvalidRecordError,
    UnknownPaperError,
)
from distillery.records import PaperId, PaperRecord

ADD_KINDS = ("add-core", "hop")
PRUNE_KINDS = ("prune-manual", "prune-hypersphere", "prune-topics")
JOURNAL_KINDS = ADD_KINDS + PRUNE_KINDS


@dataclass
class JournalEntry:
    kind: str
    affected_ids: list[PaperId]
    parameters: dict[str, Any] = field(default_factory=dict)
    timestamp: float = 0.0

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "affected_ids": [str(i) for i in self.affected_ids],
            "parameters": self.parameters,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "JournalEntry":
        return cls(
            kind=data["kind"],
            affected_ids=[PaperId.from_str(s) for s in data["affected_ids"]],
            parameters=dict(data.get("parameters", {})),
            timestamp=float(data.get("timestamp", 0.0)),
        )


@dataclass
class Snapshot:
    """Checkpoint tying a corpus membership to a journal position."""

    journal_index: int
    member_ids: list[str]
    label: str = ""

    def to_json(self) -> dict[str, Any]:
        return {
            "journal_index": self.journal_index,
            "member_ids": self.member_ids,
            "label": self.label,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "Snapshot":
        return cls(
            journal_index=int(data["journal_index"]),
            member_ids=list(data["member_ids"]),
            label=data.get("label", ""),
        )


def canonical_json(obj: Any) -> bytes:
    """Deterministic serialization used for checksums and equality checks."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


class Session:
    """Single-writer container for the corpus, journal, and config.

    Not internally thread-safe; the service layer serializes mutations.
    """

    def __init__(self, config: SessionConfig | None = None,
                 clock: Callable[[], float] = time.time):
        self.config = config or SessionConfig()
        self.archive: dict[PaperId, PaperRecord] = {}
        self.journal: list[JournalEntry] = []
        self.snapshots: list[Snapshot] = []
        self._members: set[PaperId] = set()
        self._clock = clock

    # --- views -------------------------------------------------------------

    @property
    def corpus(self) -> dict[PaperId, PaperRecord]:
        return {pid: self.archive[pid] for pid in self.member_ids()}

    def member_ids(self) -> list[PaperId]:
        return sorted(self._members)

    def __contains__(self, pid: PaperId) -> bool:
        return pid in self._members

    def __len__(self) -> int:
        return len(self._members)

    def record(self, pid: PaperId) -> PaperRecord:
        if pid not in self._members:
            raise UnknownPaperError(f"{pid} is not in the corpus")
        return self.archive[pid]

    def records(self) -> list[PaperRecord]:
        return [self.archive[pid] for pid in self.member_ids()]

    def core_ids(self) -> list[PaperId]:
        return [pid for pid in self.member_ids() if self.archive[pid].is_core]

    def current_hop(self) -> int:
        return max((self.archive[pid].hop for pid in self._members), default=0)

    def corpus_digest(self) -> bytes:
        """Canonical serialization of the live corpus, for equality checks."""
        return canonical_json([self.archive[pid].to_json() for pid in self.member_ids()])

    # --- mutations ----------------------------------------------------------

    def add_core(self, records: list[PaperRecord]) -> None:
        if not records:
            raise EmptyCoreError("a core set must contain at least one paper")
        seen: set[PaperId] = set()
        for rec in records:
            if rec.id in seen or rec.id in self._members:
                raise DuplicatePaperError(f"duplicate core id {rec.id}")
            seen.add(rec.id)
        if any(not self.archive[pid].is_core for pid in self._members):
            raise InvalidRecordError("core papers can only be added before the first hop")
        for rec in records:
            rec.hop = 0
            rec.is_core = True
            rec.validate()
        self._apply_add("add-core", records, {})

    def add_papers(self, records: list[PaperRecord], kind: str = "hop",
                   parameters: dict[str, Any] | None = None) -> list[PaperId]:
        """Add expansion results. Records already in the corpus are rejected;
        records seen before (pruned, then re-found) keep their archived hop."""
        if kind not in ADD_KINDS:
            raise InvalidRecordError(f"not an additive journal kind: {kind!r}")
        fresh: list[PaperRecord] = []
        seen: set[PaperId] = set()
        for rec in records:
            if rec.id in self._members:
                raise DuplicatePaperError(f"{rec.id} is already in the corpus")
            if rec.id in seen:
                raise DuplicatePaperError(f"duplicate id {rec.id} in one batch")
            seen.add(rec.id)
            if rec.id in self.archive:
                fresh.append(self.archive[rec.id])  # hop labels never change
            else:
                rec.validate()
                fresh.append(rec)
        self._apply_add(kind, fresh, parameters or {})
        return [rec.id for rec in fresh]

    def _apply_add(self, kind: str, records: list[PaperRecord],
                   parameters: dict[str, Any]) -> None:
        ordered = sorted(records, key=lambda r: r.id)
        for rec in ordered:
            self.archive[rec.id] = rec
            self._members.add(rec.id)
        self.journal.append(JournalEntry(
            kind=kind,
            affected_ids=[rec.id for rec in ordered],
            parameters=parameters,
            timestamp=self._clock(),
        ))

    def remove_papers(self, ids: Iterable[PaperId], kind: str,
                      parameters: dict[str, Any] | None = None) -> None:
        if kind not in PRUNE_KINDS:
            raise InvalidRecordError(f"not a prune kind: {kind!r}")
        ids = sorted(set(ids))
        for pid in ids:
            if pid not in self._members:
                raise UnknownPaperError(f"cannot prune {pid}: not in the corpus")
            if self.archive[pid].is_core:
                raise CorePaperError(f"refusing to prune core paper {pid}")
        for pid in ids:
            self._members.discard(pid)
        self.journal.append(JournalEntry(
            kind=kind,
            affected_ids=list(ids),
            parameters=parameters or {},
            timestamp=self._clock(),
        ))

    def undo(self) -> None:
        if not self.journal:
            raise EmptyJournalError("nothing to undo")
        self.journal.pop()
        while self.snapshots and self.snapshots[-1].journal_index > len(self.journal):
            self.snapshots.pop()
        self._members = self.replay_members()

    def take_snapshot(self, label: str = "") -> Snapshot:
        snap = Snapshot(
            journal_index=len(self.journal),
            member_ids=[str(pid) for pid in self.member_ids()],
            label=label,
        )
        self.snapshots.append(snap)
        return snap

    # --- replay -------------------------------------------------------------

    def replay_members(self, journal: list[JournalEntry] | None = None) -> set[PaperId]:
        """Fold the journal into a membership set, starting from nothing."""
        members: set[PaperId] = set()
        for entry in (self.journal if journal is None else journal):
            if entry.kind in ADD_KINDS:
                members.update(entry.affected_ids)
            elif entry.kind in PRUNE_KINDS:
                members.difference_update(entry.affected_ids)
            else:
                raise InvalidRecordError(f"unknown journal kind {entry.kind!r}")
        return members

    def check_integrity(self) -> None:
        """Assert the replay invariant; raises if the journal and corpus drifted."""
        replayed = self.replay_members()
        if replayed != self._members:
            raise InvalidRecordError("journal replay does not reproduce the corpus")
        missing = replayed - set(self.archive)
        if missing:
            raise InvalidRecordError(f"members missing from archive: {sorted(missing)[:5]}")

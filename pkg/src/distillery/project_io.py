"""Versioned on-disk project format.

A project is a directory holding:

* ``project.json`` -- one JSON document: format version, an integrity
  checksum over the canonical body, the config, the paper archive, the
  journal, snapshots, and (optionally) a reference to the embedding file
  and a cached 2-D layout.
* ``embeddings.bin`` -- header ``CDEM`` magic, u32 version, u32 n, u32 d
  (little-endian), then n*d little-endian float32 values, rows in
  paper-id sorted order. The ids themselves live in project.json.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path
from typing import Any

import numpy as np

from distillery.config import SessionConfig
from distillery.errors import ChecksumError, ProjectFormatError, UnsupportedVersionError
from distillery.records import PaperId, PaperRecord
from distillery.store import JournalEntry, Session, Snapshot, canonical_json

PROJECT_VERSION = 1
SUPPORTED_VERSIONS = (1,)
PROJECT_FILE = "project.json"
EMBEDDING_FILE = "embeddings.bin"

EMBED_MAGIC = b"CDEM"
EMBED_VERSION = 1
_HEADER = struct.Struct("<4sIII")


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def write_embeddings(path: Path, ids: list[PaperId], vectors: np.ndarray) -> str:
    """Write the binary embedding file; returns its sha256 hex digest."""
    vectors = np.asarray(vectors, dtype="<f4")
    if vectors.ndim != 2 or vectors.shape[0] != len(ids):
        raise ProjectFormatError("embedding matrix shape does not match the id list")
    order = np.argsort([str(i) for i in ids], kind="stable")
    blob = _HEADER.pack(EMBED_MAGIC, EMBED_VERSION, vectors.shape[0], vectors.shape[1])
    blob += vectors[order].tobytes(order="C")
    path.write_bytes(blob)
    return _sha256(blob)


def read_embeddings(path: Path) -> tuple[int, int, np.ndarray]:
    blob = path.read_bytes()
    if len(blob) < _HEADER.size:
        raise ProjectFormatError(f"{path}: truncated embedding file")
    magic, version, n, d = _HEADER.unpack_from(blob)
    if magic != EMBED_MAGIC:
        raise ProjectFormatError(f"{path}: bad magic {magic!r}")
    if version != EMBED_VERSION:
        raise UnsupportedVersionError(
            f"{path}: embedding file version {version}; supported: {EMBED_VERSION}")
    expected = _HEADER.size + 4 * n * d
    if len(blob) != expected:
        raise ProjectFormatError(f"{path}: expected {expected} bytes, found {len(blob)}")
    vectors = np.frombuffer(blob, dtype="<f4", offset=_HEADER.size).reshape(n, d)
    return n, d, vectors.copy()


def save_project(session: Session, directory: str | Path,
                 embeddings: dict[PaperId, np.ndarray] | None = None,
                 layout: dict[str, Any] | None = None) -> Path:
    """Write ``project.json`` (and ``embeddings.bin`` when given) into *directory*."""
    session.check_integrity()
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    body: dict[str, Any] = {
        "config": session.config.to_json(),
        "papers": [session.archive[pid].to_json() for pid in sorted(session.archive)],
        "journal": [entry.to_json() for entry in session.journal],
        "snapshots": [snap.to_json() for snap in session.snapshots],
        "embedding": None,
        "layout": layout,
    }
    if embeddings:
        ids = sorted(embeddings, key=str)
        vectors = np.stack([embeddings[pid] for pid in ids])
        digest = write_embeddings(directory / EMBEDDING_FILE, ids, vectors)
        body["embedding"] = {
            "file": EMBEDDING_FILE,
            "sha256": digest,
            "ids": [str(pid) for pid in ids],
        }

    document = {
        "version": PROJECT_VERSION,
        "checksum": _sha256(canonical_json(body)),
        "body": body,
    }
    path = directory / PROJECT_FILE
    path.write_text(json.dumps(document, indent=2, ensure_ascii=False, sort_keys=True))
    return path


def load_project(directory: str | Path) -> tuple[Session, dict[PaperId, np.ndarray], dict[str, Any] | None]:
    """Read a project directory back into a live session.

    Returns (session, embeddings-by-id, cached layout or None). The corpus is
    reconstructed by replaying the journal, so a file whose journal and paper
    archive disagree cannot load into an inconsistent state.
    """
    directory = Path(directory)
    path = directory / PROJECT_FILE
    if not path.is_file():
        raise ProjectFormatError(f"no {PROJECT_FILE} in {directory}")
    try:
        document = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ProjectFormatError(f"{path}: not valid JSON ({exc})") from exc

    version = document.get("version")
    if version not in SUPPORTED_VERSIONS:
        raise UnsupportedVersionError(
            f"{path}: project version {version!r}; supported versions: "
            + ", ".join(str(v) for v in SUPPORTED_VERSIONS))
    body = document.get("body")
    if body is None or "checksum" not in document:
        raise ProjectFormatError(f"{path}: missing body or checksum")
    if _sha256(canonical_json(body)) != document["checksum"]:
        raise ChecksumError(f"{path}: checksum mismatch; the file is corrupt")

    session = Session(config=SessionConfig.from_json(body["config"]))
    for raw in body["papers"]:
        rec = PaperRecord.from_json(raw)
        session.archive[rec.id] = rec
    session.journal = [JournalEntry.from_json(raw) for raw in body["journal"]]
    session.snapshots = [Snapshot.from_json(raw) for raw in body.get("snapshots", [])]
    session._members = session.replay_members()
    session.check_integrity()

    embeddings: dict[PaperId, np.ndarray] = {}
    meta = body.get("embedding")
    if meta:
        epath = directory / meta["file"]
        if not epath.is_file():
            raise ProjectFormatError(f"{epath}: referenced embedding file is missing")
        blob = epath.read_bytes()
        if _sha256(blob) != meta["sha256"]:
            raise ChecksumError(f"{epath}: embedding file hash mismatch")
        n, d, vectors = read_embeddings(epath)
        ids = [PaperId.from_str(s) for s in meta["ids"]]
        if len(ids) != n:
            raise ProjectFormatError(f"{epath}: id list and row count disagree")
        embeddings = {pid: vectors[i] for i, pid in enumerate(ids)}

    return session, embeddings, body.get("layout")

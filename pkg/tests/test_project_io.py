import json

import numpy as np
import pytest

from distillery.config import SessionConfig
from distillery.errors import ChecksumError, ProjectFormatError, UnsupportedVersionError
from distillery.project_io import (
    EMBED_MAGIC,
    load_project,
    read_embeddings,
    save_project,
    write_embeddings,
)
from distillery.records import PaperId
from distillery.store import Session

from .conftest import simple_record


def three_hop_session() -> Session:
    session = Session(config=SessionConfig(seed=3, embedding_dim=4))
    session.add_core([simple_record(f"c{i}") for i in range(3)])
    session.add_papers([simple_record(f"a{i}", hop=1) for i in range(5)],
                       parameters={"direction": "citations"})
    session.remove_papers([PaperId.local("a0")], kind="prune-manual")
    session.add_papers([simple_record(f"b{i}", hop=2) for i in range(3)])
    session.add_papers([simple_record("d0", hop=3)])
    session.take_snapshot("end")
    return session


class TestRoundTrip:
    def test_corpus_journal_config_survive(self, tmp_path):
        session = three_hop_session()
        save_project(session, tmp_path)
        loaded, embeddings, layout = load_project(tmp_path)
        assert loaded.corpus_digest() == session.corpus_digest()
        assert [e.to_json() for e in loaded.journal] == [e.to_json() for e in session.journal]
        assert loaded.config == session.config
        assert [s.to_json() for s in loaded.snapshots] == [s.to_json() for s in session.snapshots]
        assert embeddings == {} and layout is None

    def test_embeddings_round_trip(self, tmp_path):
        session = three_hop_session()
        rng = np.random.default_rng(0)
        vectors = {pid: rng.normal(size=4).astype(np.float32)
                   for pid in session.member_ids()}
        save_project(session, tmp_path, embeddings=vectors)
        _, loaded, _ = load_project(tmp_path)
        assert set(loaded) == set(vectors)
        for pid, vec in vectors.items():
            np.testing.assert_array_equal(loaded[pid], vec)

    def test_layout_round_trip(self, tmp_path):
        session = three_hop_session()
        layout = {"ids": [str(p) for p in session.member_ids()],
                  "coords": [[float(i), 0.0] for i in range(len(session))],
                  "params": {"seed": 3}}
        save_project(session, tmp_path, layout=layout)
        _, _, loaded = load_project(tmp_path)
        assert loaded == layout


class TestRejection:
    def test_future_version_names_supported(self, tmp_path):
        session = three_hop_session()
        path = save_project(session, tmp_path)
        doc = json.loads(path.read_text())
        doc["version"] = 99
        path.write_text(json.dumps(doc))
        with pytest.raises(UnsupportedVersionError, match="supported versions: 1"):
            load_project(tmp_path)

    def test_corrupted_byte_fails_checksum(self, tmp_path):
        session = three_hop_session()
        path = save_project(session, tmp_path)
        doc = json.loads(path.read_text())
        doc["body"]["journal"] = doc["body"]["journal"][:-1]  # truncate journal
        path.write_text(json.dumps(doc))
        with pytest.raises(ChecksumError):
            load_project(tmp_path)

    def test_tampered_title_fails_checksum(self, tmp_path):
        session = three_hop_session()
        path = save_project(session, tmp_path)
        raw = path.read_text().replace("Paper c0", "Paper c0X", 1)
        path.write_text(raw)
        with pytest.raises(ChecksumError):
            load_project(tmp_path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ProjectFormatError):
            load_project(tmp_path)

    def test_unparseable_json(self, tmp_path):
        (tmp_path / "project.json").write_text("{nope")
        with pytest.raises(ProjectFormatError):
            load_project(tmp_path)

    def test_embedding_hash_mismatch(self, tmp_path):
        session = three_hop_session()
        vectors = {pid: np.zeros(4, dtype=np.float32) for pid in session.member_ids()}
        save_project(session, tmp_path, embeddings=vectors)
        blob = bytearray((tmp_path / "embeddings.bin").read_bytes())
        blob[-1] ^= 0xFF
        (tmp_path / "embeddings.bin").write_bytes(bytes(blob))
        with pytest.raises(ChecksumError):
            load_project(tmp_path)


class TestEmbeddingFileFormat:
    def test_header_and_payload_layout(self, tmp_path):
        ids = [PaperId.local("b"), PaperId.local("a")]
        vectors = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=np.float32)
        path = tmp_path / "embeddings.bin"
        write_embeddings(path, ids, vectors)
        blob = path.read_bytes()
        assert blob[:4] == EMBED_MAGIC
        assert int.from_bytes(blob[4:8], "little") == 1    # version
        assert int.from_bytes(blob[8:12], "little") == 2   # n
        assert int.from_bytes(blob[12:16], "little") == 2  # d
        # rows are written in paper-id sorted order: local:a first
        floats = np.frombuffer(blob, dtype="<f4", offset=16)
        np.testing.assert_array_equal(floats, [3.0, 4.0, 1.0, 2.0])

    def test_read_rejects_bad_magic(self, tmp_path):
        path = tmp_path / "embeddings.bin"
        path.write_bytes(b"NOPE" + b"\x00" * 12)
        with pytest.raises(ProjectFormatError, match="magic"):
            read_embeddings(path)

    def test_read_rejects_truncation(self, tmp_path):
        ids = [PaperId.local("a")]
        path = tmp_path / "embeddings.bin"
        write_embeddings(path, ids, np.ones((1, 3), dtype=np.float32))
        path.write_bytes(path.read_bytes()[:-2])
        with pytest.raises(ProjectFormatError):
            read_embeddings(path)

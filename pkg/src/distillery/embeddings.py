"""Document-embedding acquisition.

The provider is pluggable: a remote HTTP service, a precomputed JSON-lines
file, or a deterministic hashing provider that needs no model at all (tests
and offline runs use the latter). Results are cached by content hash so a
corpus is never embedded twice.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

import httpx
import numpy as np

from distillery.errors import DimensionMismatchError, ProviderError
from distillery.records import PaperId, PaperRecord

_TOKEN_RE = re.compile(r"[a-z0-9]+")


@dataclass
class EmbeddingMatrix:
    """Row-aligned (ids, vectors) pair; vectors are float32 n x d."""

    ids: list[PaperId]
    vectors: np.ndarray

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float32)
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.ids):
            raise DimensionMismatchError(
                f"{len(self.ids)} ids but vector shape {self.vectors.shape}")
        if len(set(self.ids)) != len(self.ids):
            raise DimensionMismatchError("duplicate ids in embedding matrix")
        if not np.all(np.isfinite(self.vectors)):
            raise ProviderError("embedding matrix contains non-finite entries")

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def subset(self, ids: Sequence[PaperId]) -> "EmbeddingMatrix":
        index = {pid: i for i, pid in enumerate(self.ids)}
        rows = [index[pid] for pid in ids]
        return EmbeddingMatrix(list(ids), self.vectors[rows])


class EmbeddingProvider(Protocol):
    dimension: int
    fingerprint: str

    def embed(self, ids: Sequence[PaperId], texts: Sequence[str]) -> np.ndarray:
        """Return one row per input text (or per id, for keyed providers)."""


class HashingProvider:
    """Deterministic test provider: token multiset -> seeded hash -> unit vector.

    Two texts sharing most tokens land close together, which is enough
    structure for offline fixtures and geometry tests.
    """

    def __init__(self, dimension: int = 768, seed: int = 0):
        self.dimension = dimension
        self.seed = seed
        self.fingerprint = f"hashing:d={dimension}:seed={seed}"
        self._token_cache: dict[str, np.ndarray] = {}

    def _token_vector(self, token: str) -> np.ndarray:
        vec = self._token_cache.get(token)
        if vec is None:
            digest = hashlib.sha256(f"{self.seed}:{token}".encode("utf-8")).digest()
            rng = np.random.Generator(np.random.PCG64(int.from_bytes(digest[:8], "little")))
            vec = rng.standard_normal(self.dimension)
            self._token_cache[token] = vec
        return vec

    def embed(self, ids: Sequence[PaperId], texts: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dimension))
        for row, text in enumerate(texts):
            tokens = _TOKEN_RE.findall(text.lower()) or [""]
            for token in tokens:
                out[row] += self._token_vector(token)
            norm = np.linalg.norm(out[row])
            if norm == 0.0:
                out[row] = self._token_vector("")
                norm = np.linalg.norm(out[row])
            out[row] /= norm
        return out.astype(np.float32)


class RemoteProvider:
    """HTTP embedding service: POST {base}/embed {"texts": [...]} ->
    {"embeddings": [[...], ...]}."""

    def __init__(self, base_url: str, dimension: int, *,
                 client: httpx.Client | None = None, batch_size: int = 64):
        self.base_url = base_url.rstrip("/")
        self.dimension = dimension
        self.fingerprint = f"remote:{self.base_url}:d={dimension}"
        self.batch_size = batch_size
        self._client = client or httpx.Client(timeout=60.0)

    def embed(self, ids: Sequence[PaperId], texts: Sequence[str]) -> np.ndarray:
        rows: list[list[float]] = []
        for start in range(0, len(texts), self.batch_size):
            batch = list(texts[start:start + self.batch_size])
            try:
                resp = self._client.post(f"{self.base_url}/embed", json={"texts": batch})
                resp.raise_for_status()
                payload = resp.json()
            except httpx.HTTPError as exc:
                raise ProviderError(f"embedding service failed: {exc}") from exc
            vectors = payload.get("embeddings")
            if not isinstance(vectors, list) or len(vectors) != len(batch):
                raise ProviderError("embedding service returned a malformed payload")
            rows.extend(vectors)
        out = np.asarray(rows, dtype=np.float32)
        if out.ndim != 2 or out.shape[1] != self.dimension:
            raise DimensionMismatchError(
                f"provider returned dimension {out.shape[-1]}, expected {self.dimension}")
        return out


class PrecomputedProvider:
    """Vectors loaded from a JSON-lines file of {"id": ..., "vector": [...]}."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._table: dict[str, np.ndarray] = {}
        dim: int | None = None
        with open(self.path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                row = json.loads(line)
                vec = np.asarray(row["vector"], dtype=np.float32)
                if dim is None:
                    dim = vec.shape[0]
                elif vec.shape[0] != dim:
                    raise DimensionMismatchError(
                        f"{self.path}: mixed dimensions {dim} and {vec.shape[0]}")
                self._table[str(PaperId.from_str(row["id"]))] = vec
        if dim is None:
            raise ProviderError(f"{self.path}: no vectors found")
        self.dimension = dim
        self.fingerprint = f"precomputed:{self.path}"

    def embed(self, ids: Sequence[PaperId], texts: Sequence[str]) -> np.ndarray:
        rows = []
        for pid in ids:
            vec = self._table.get(str(pid))
            if vec is None:
                raise ProviderError(f"no precomputed embedding for {pid}")
            rows.append(vec)
        return np.stack(rows)


@dataclass
class EmbeddingService:
    """Provider plus a content-hash cache keyed by (provider, text)."""

    provider: EmbeddingProvider
    _cache: dict[str, np.ndarray] = field(default_factory=dict)

    def _key(self, pid: PaperId, text: str) -> str:
        raw = f"{self.provider.fingerprint}\x00{pid}\x00{text}"
        return hashlib.sha256(raw.encode("utf-8")).hexdigest()

    def embed_records(self, records: Sequence[PaperRecord]) -> EmbeddingMatrix:
        if not records:
            raise ProviderError("cannot embed an empty record list")
        ids = [rec.id for rec in records]
        texts = [rec.embedding_text() for rec in records]
        keys = [self._key(pid, text) for pid, text in zip(ids, texts)]

        missing = [i for i, key in enumerate(keys) if key not in self._cache]
        if missing:
            fresh = self.provider.embed([ids[i] for i in missing],
                                        [texts[i] for i in missing])
            fresh = np.asarray(fresh, dtype=np.float32)
            if fresh.shape != (len(missing), self.provider.dimension):
                raise DimensionMismatchError(
                    f"provider returned shape {fresh.shape}, expected "
                    f"({len(missing)}, {self.provider.dimension})")
            if not np.all(np.isfinite(fresh)):
                raise ProviderError("provider returned non-finite embeddings")
            for row, i in enumerate(missing):
                self._cache[keys[i]] = fresh[row]

        vectors = np.stack([self._cache[key] for key in keys])
        return EmbeddingMatrix(ids, vectors)

"""Citation-network expansion: metadata backends, caching client, and hops.

The wire contract is Semantic Scholar-compatible: ``GET /paper/{id}`` with a
``fields`` query returns one document with nested citation/reference id
lists, and the ``/paper/{id}/citations`` and ``/references`` sub-resources
paginate with offset/limit when the nested lists are truncated. An offline
fixture directory (one canonical-JSON document per paper id) is a
first-class backend so everything runs without a network.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Protocol

import httpx

from distillery.errors import (
    EmptyCoreError,
    FetchError,
    InvalidIdError,
    InvalidRecordError,
    MalformedResponseError,
    NetworkError,
    NotFoundError,
    RateLimitedError,
)
from distillery.records import PaperId, PaperRecord, looks_like_doi
from distillery.store import Session

DIRECTIONS = ("citations", "references")
FIELDS = "title,abstract,year,authors,citations,references"

_SAFE_RE = re.compile(r"[^A-Za-z0-9._-]")


def safe_filename(pid: PaperId) -> str:
    return _SAFE_RE.sub("_", str(pid))


class TokenBucket:
    """Thread-safe token bucket; clock and sleeper are injectable for tests."""

    def __init__(self, rate_per_s: float, burst: int,
                 clock: Callable[[], float] = time.monotonic,
                 sleeper: Callable[[float], None] = time.sleep):
        if rate_per_s <= 0:
            raise ValueError("rate must be positive")
        self.rate = rate_per_s
        self.capacity = max(1, burst)
        self._tokens = float(self.capacity)
        self._clock = clock
        self._sleeper = sleeper
        self._updated = clock()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self._clock()
                self._tokens = min(self.capacity,
                                   self._tokens + (now - self._updated) * self.rate)
                self._updated = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                # floor prevents a float-absorption livelock when tokens sits
                # an ulp below 1.0 and the computed wait underflows
                wait = max((1.0 - self._tokens) / self.rate, 1e-6)
            self._sleeper(wait)


class MetadataBackend(Protocol):
    def fetch_raw(self, pid: PaperId) -> dict[str, Any]:
        """Return the full wire document for one paper."""


class InMemoryBackend:
    """Documents served from a dict keyed by str(PaperId); used by tests and
    programmatic sessions over synthetic graphs."""

    def __init__(self, documents: dict[str, dict[str, Any]]):
        self._documents = documents
        self.calls = 0

    def fetch_raw(self, pid: PaperId) -> dict[str, Any]:
        self.calls += 1
        doc = self._documents.get(str(pid))
        if doc is None:
            raise NotFoundError(f"{pid} is not in the in-memory corpus")
        return doc


class FixtureBackend:
    """Offline directory of canned responses, one JSON document per id."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        if not self.directory.is_dir():
            raise FetchError(f"fixture directory {self.directory} does not exist")
        self.calls = 0

    def fetch_raw(self, pid: PaperId) -> dict[str, Any]:
        self.calls += 1
        path = self.directory / f"{safe_filename(pid)}.json"
        if not path.is_file():
            raise NotFoundError(f"no fixture for {pid}")
        try:
            return json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise MalformedResponseError(f"{path}: invalid JSON") from exc


class HttpBackend:
    """Rate-limited HTTP backend with sub-resource pagination.

    Nested citation/reference lists at or above ``nested_limit`` entries are
    treated as possibly truncated and re-fetched through the paginated
    ``/citations`` and ``/references`` endpoints.
    """

    def __init__(self, base_url: str, *,
                 api_key_env: str = "DISTILL_API_KEY",
                 bucket: TokenBucket | None = None,
                 client: httpx.Client | None = None,
                 nested_limit: int = 1000,
                 page_size: int = 500,
                 max_retries: int = 2,
                 sleeper: Callable[[float], None] = time.sleep):
        self.base_url = base_url.rstrip("/")
        self.bucket = bucket or TokenBucket(rate_per_s=1.0, burst=10)
        self.nested_limit = nested_limit
        self.page_size = page_size
        self.max_retries = max_retries
        self._sleeper = sleeper
        headers = {}
        key = os.environ.get(api_key_env, "")
        if key:
            headers["x-api-key"] = key
        self._client = client or httpx.Client(timeout=30.0, headers=headers)

    def _request(self, url: str, params: dict[str, Any]) -> dict[str, Any]:
        last_exc: FetchError | None = None
        for attempt in range(self.max_retries + 1):
            self.bucket.acquire()
            try:
                resp = self._client.get(url, params=params)
            except httpx.HTTPError as exc:
                last_exc = NetworkError(f"GET {url} failed: {exc}")
                self._sleeper(0.5 * (attempt + 1))
                continue
            if resp.status_code == 404:
                raise NotFoundError(f"{url}: not found upstream")
            if resp.status_code == 429:
                retry_after = _parse_retry_after(resp)
                last_exc = RateLimitedError(f"{url}: rate limited", retry_after)
                self._sleeper(min(retry_after or 1.0, 30.0))
                continue
            if resp.status_code >= 500:
                last_exc = NetworkError(f"{url}: server error {resp.status_code}")
                self._sleeper(0.5 * (attempt + 1))
                continue
            if resp.status_code != 200:
                raise FetchError(f"{url}: unexpected status {resp.status_code}")
            try:
                payload = resp.json()
            except ValueError as exc:
                raise MalformedResponseError(f"{url}: response is not JSON") from exc
            if not isinstance(payload, dict):
                raise MalformedResponseError(f"{url}: expected a JSON object")
            return payload
        assert last_exc is not None
        raise last_exc

    def _paginate(self, url: str, entry_key: str) -> list[dict[str, Any]]:
        offset, out = 0, []
        while True:
            page = self._request(url, {"fields": "paperId,externalIds",
                                       "offset": offset, "limit": self.page_size})
            data = page.get("data", [])
            for item in data:
                doc = item.get(entry_key)
                if doc:
                    out.append(doc)
            if "next" in page and page["next"] is not None and data:
                offset = int(page["next"])
            else:
                return out

    def fetch_raw(self, pid: PaperId) -> dict[str, Any]:
        path = _wire_path(pid)
        doc = self._request(f"{self.base_url}/paper/{path}", {"fields": FIELDS})
        for key, entry_key in (("citations", "citingPaper"), ("references", "citedPaper")):
            nested = doc.get(key) or []
            if len(nested) >= self.nested_limit:
                doc[key] = self._paginate(f"{self.base_url}/paper/{path}/{key}", entry_key)
        return doc


def _parse_retry_after(resp: httpx.Response) -> float | None:
    value = resp.headers.get("retry-after")
    try:
        return float(value) if value is not None else None
    except ValueError:
        return None


def _wire_path(pid: PaperId) -> str:
    if pid.scheme == "doi":
        return f"DOI:{pid.value}"
    if pid.scheme == "api-native":
        return pid.value
    raise InvalidIdError(f"{pid}: local ids cannot be fetched over HTTP")


def parse_wire_id(doc: dict[str, Any]) -> PaperId:
    external = doc.get("externalIds") or {}
    doi = external.get("DOI") or external.get("doi")
    if doi:
        return PaperId.doi(str(doi))
    native = doc.get("paperId")
    if native:
        return PaperId.native(str(native))
    raise MalformedResponseError("wire document has neither a DOI nor a paperId")


def _parse_id_list(items: Any) -> list[PaperId]:
    ids: list[PaperId] = []
    seen: set[PaperId] = set()
    for item in items or []:
        try:
            pid = parse_wire_id(item)
        except MalformedResponseError:
            continue  # unidentifiable entries cannot be followed anyway
        if pid not in seen:
            seen.add(pid)
            ids.append(pid)
    return ids


def parse_record(pid: PaperId, doc: dict[str, Any]) -> PaperRecord:
    """Build a record from a wire document; the id stays the one we asked for."""
    if not isinstance(doc, dict) or "title" not in doc:
        raise MalformedResponseError(f"{pid}: wire document lacks a title field")
    authors = []
    for a in doc.get("authors") or []:
        if isinstance(a, dict) and a.get("name"):
            authors.append(str(a["name"]))
        elif isinstance(a, str):
            authors.append(a)
    year = doc.get("year")
    return PaperRecord(
        id=pid,
        title=str(doc.get("title") or ""),
        abstract=str(doc.get("abstract") or ""),
        year=int(year) if year is not None else None,
        authors=authors,
        citation_ids=[i for i in _parse_id_list(doc.get("citations")) if i != pid],
        reference_ids=[i for i in _parse_id_list(doc.get("references")) if i != pid],
        hop=0,
        is_core=False,
    )


def validate_id(pid: PaperId) -> None:
    if pid.scheme == "doi" and not looks_like_doi(pid.value):
        raise InvalidIdError(f"{pid.value!r} is not a syntactically valid DOI")


class CitationClient:
    """Caching fetch layer over a metadata backend.

    Fresh cache hits never touch the backend; fetches for many ids run on a
    bounded thread pool. Public methods are safe to call from multiple
    threads.
    """

    def __init__(self, backend: MetadataBackend, *,
                 cache_dir: str | Path | None = None,
                 max_age_s: float = 7 * 24 * 3600.0,
                 max_in_flight: int = 8,
                 clock: Callable[[], float] = time.time):
        self.backend = backend
        self.cache_dir = Path(cache_dir) if cache_dir else None
        if self.cache_dir:
            self.cache_dir.mkdir(parents=True, exist_ok=True)
        self.max_age_s = max_age_s
        self.max_in_flight = max(1, max_in_flight)
        self._clock = clock
        self._memory: dict[PaperId, tuple[PaperRecord, float]] = {}
        self._lock = threading.Lock()

    # --- cache layers -------------------------------------------------------

    def _fresh(self, fetched_at: float) -> bool:
        return (self._clock() - fetched_at) <= self.max_age_s

    def _cache_path(self, pid: PaperId) -> Path:
        assert self.cache_dir is not None
        digest = hashlib.sha256(str(pid).encode("utf-8")).hexdigest()[:8]
        return self.cache_dir / f"{safe_filename(pid)}_{digest}.json"

    def _from_disk(self, pid: PaperId) -> PaperRecord | None:
        if not self.cache_dir:
            return None
        path = self._cache_path(pid)
        if not path.is_file():
            return None
        try:
            payload = json.loads(path.read_text())
            if not self._fresh(float(payload["fetched_at"])):
                return None
            # hop/is_core are provenance assigned at add time, not metadata
            return PaperRecord.from_json(payload["record"], validate=False)
        except (KeyError, ValueError, InvalidRecordError):
            return None  # damaged cache entries are simply refetched

    def _to_disk(self, pid: PaperId, record: PaperRecord, fetched_at: float) -> None:
        if not self.cache_dir:
            return
        payload = {"fetched_at": fetched_at, "record": record.to_json()}
        self._cache_path(pid).write_text(
            json.dumps(payload, sort_keys=True, ensure_ascii=False))

    # --- fetching ------------------------------------------------------------

    def fetch_paper(self, pid: PaperId) -> PaperRecord:
        validate_id(pid)
        with self._lock:
            hit = self._memory.get(pid)
            if hit and self._fresh(hit[1]):
                return hit[0]
        record = self._from_disk(pid)
        if record is None:
            doc = self.backend.fetch_raw(pid)
            record = parse_record(pid, doc)
            now = self._clock()
            self._to_disk(pid, record, now)
        else:
            now = self._clock()
        with self._lock:
            self._memory[pid] = (record, now)
        return record

    def fetch_many(self, ids: list[PaperId]) -> tuple[dict[PaperId, PaperRecord],
                                                      dict[PaperId, FetchError]]:
        records: dict[PaperId, PaperRecord] = {}
        errors: dict[PaperId, FetchError] = {}
        if not ids:
            return records, errors

        def one(pid: PaperId) -> tuple[PaperId, PaperRecord | None, FetchError | None]:
            try:
                return pid, self.fetch_paper(pid), None
            except FetchError as exc:
                return pid, None, exc

        with ThreadPoolExecutor(max_workers=min(self.max_in_flight, len(ids))) as pool:
            for pid, record, exc in pool.map(one, ids):
                if record is not None:
                    records[pid] = record
                else:
                    errors[pid] = exc  # type: ignore[assignment]
        return records, errors


@dataclass
class HopResult:
    new_ids: set[PaperId]
    direction: str
    requested_at_hop: int
    failures: dict[PaperId, FetchError] = field(default_factory=dict)


def linked_ids(session: Session, direction: str) -> set[PaperId]:
    """The frontier: ids one edge away from the corpus, not yet members."""
    if direction not in DIRECTIONS:
        raise InvalidRecordError(f"direction must be one of {DIRECTIONS}")
    out: set[PaperId] = set()
    for record in session.records():
        out.update(record.citation_ids if direction == "citations"
                   else record.reference_ids)
    return {pid for pid in out if pid not in session}


def hop_preview(session: Session, direction: str) -> int:
    """Size of the next hop's delta, without mutating anything."""
    return len(linked_ids(session, direction))


def hop(session: Session, client: CitationClient, direction: str) -> HopResult:
    """One expansion step: corpus := corpus union its one-edge neighborhood.

    Per-paper fetch failures are collected and journaled rather than failing
    the whole hop; a hop losing more than half its frontier is marked
    degraded. Papers seen in an earlier generation keep their hop label.
    """
    if len(session) == 0:
        raise EmptyCoreError("cannot hop on an empty session")
    frontier = sorted(linked_ids(session, direction))
    hop_number = session.current_hop() + 1

    to_fetch = [pid for pid in frontier if pid not in session.archive]
    records, failures = client.fetch_many(to_fetch)

    to_add: list[PaperRecord] = []
    for pid in frontier:
        if pid in session.archive:
            to_add.append(session.archive[pid])
            continue
        record = records.get(pid)
        if record is None:
            continue
        record.hop = hop_number
        record.is_core = False
        to_add.append(record)

    degraded = bool(frontier) and len(failures) > 0.5 * len(frontier)
    parameters = {
        "direction": direction,
        "failed_ids": sorted(str(pid) for pid in failures),
        "degraded": degraded,
    }
    added = session.add_papers(to_add, kind="hop", parameters=parameters)
    return HopResult(new_ids=set(added), direction=direction,
                     requested_at_hop=hop_number, failures=failures)

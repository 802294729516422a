"""Paper identifiers and metadata records.

Everything downstream (hops, pruning, persistence) is keyed by ``PaperId``.
Ids are normalized once, at construction, so equality and sorting behave the
same no matter where an id came from.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any

from distillery.errors import InvalidRecordError

SCHEMES = ("doi", "api-native", "local")

_DOI_URL_PREFIX = re.compile(r"^https?://doi\.org/", re.IGNORECASE)
_DOI_SHAPE = re.compile(r"^10\.\d{4,9}/\S+$")


def normalize_doi(value: str) -> str:
    """Lowercase and strip a leading doi.org URL prefix."""
    return _DOI_URL_PREFIX.sub("", value.strip()).lower()


def looks_like_doi(value: str) -> bool:
    return bool(_DOI_SHAPE.match(value))


@dataclass(frozen=True, order=True)
class PaperId:
    """A (scheme, value) pair; DOIs are case-normalized at construction."""

    scheme: str
    value: str

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise InvalidRecordError(f"unknown id scheme {self.scheme!r}")
        value = self.value.strip()
        if self.scheme == "doi":
            value = normalize_doi(value)
        if not value:
            raise InvalidRecordError("paper id value must be nonempty")
        object.__setattr__(self, "value", value)

    def __str__(self) -> str:
        return f"{self.scheme}:{self.value}"

    @classmethod
    def from_str(cls, text: str) -> "PaperId":
        scheme, sep, value = text.partition(":")
        if not sep:
            raise InvalidRecordError(f"malformed paper id {text!r}")
        return cls(scheme, value)

    @classmethod
    def doi(cls, value: str) -> "PaperId":
        return cls("doi", value)

    @classmethod
    def native(cls, value: str) -> "PaperId":
        return cls("api-native", value)

    @classmethod
    def local(cls, value: str) -> "PaperId":
        return cls("local", value)


@dataclass
class PaperRecord:
    """One publication's metadata plus expansion provenance."""

    id: PaperId
    title: str
    abstract: str = ""
    year: int | None = None
    authors: list[str] = field(default_factory=list)
    citation_ids: list[PaperId] = field(default_factory=list)
    reference_ids: list[PaperId] = field(default_factory=list)
    hop: int = 0
    is_core: bool = False

    def validate(self) -> None:
        if self.hop < 0:
            raise InvalidRecordError(f"{self.id}: hop must be nonnegative")
        if self.is_core != (self.hop == 0):
            raise InvalidRecordError(
                f"{self.id}: hop 0 and the core flag must agree "
                f"(hop={self.hop}, is_core={self.is_core})"
            )
        for name, ids in (("citation_ids", self.citation_ids),
                          ("reference_ids", self.reference_ids)):
            if len(set(ids)) != len(ids):
                raise InvalidRecordError(f"{self.id}: duplicate entries in {name}")

    def embedding_text(self) -> str:
        """Text handed to the embedding provider; degrades to the title alone."""
        if self.abstract:
            return f"{self.title}. {self.abstract}"
        return self.title

    def to_json(self) -> dict[str, Any]:
        return {
            "id": str(self.id),
            "title": self.title,
            "abstract": self.abstract,
            "year": self.year,
            "authors": list(self.authors),
            "citation_ids": [str(i) for i in self.citation_ids],
            "reference_ids": [str(i) for i in self.reference_ids],
            "hop": self.hop,
            "is_core": self.is_core,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any], validate: bool = True) -> "PaperRecord":
        rec = cls(
            id=PaperId.from_str(data["id"]),
            title=data.get("title", ""),
            abstract=data.get("abstract") or "",
            year=data.get("year"),
            authors=list(data.get("authors", [])),
            citation_ids=[PaperId.from_str(s) for s in data.get("citation_ids", [])],
            reference_ids=[PaperId.from_str(s) for s in data.get("reference_ids", [])],
            hop=int(data.get("hop", 0)),
            is_core=bool(data.get("is_core", False)),
        )
        if validate:
            rec.validate()
        return rec

"""Deterministic text cleaning and the sparse matrices behind topic modeling.

Cleaning removes stopwords, markup, e-mail addresses, non-ASCII characters,
and copyright statements, and consolidates SME-identified term variants into
a single token *before* tokenization so multi-word terms survive as one
hyphenated token. The vocabulary is derived from the core papers once and
reused at every hop, so off-topic papers become near-empty TF-IDF columns
instead of growing the term axis.
"""

from __future__ import annotations

import html
import json
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from distillery.errors import InvalidRecordError, VocabularyError

_TOKEN_RE = re.compile(r"[a-z0-9]+(?:-[a-z0-9]+)*")
_WORD_RE = re.compile(r"[A-Za-z']+")
_TAG_RE = re.compile(r"<[^>]*>")
_EMAIL_RE = re.compile(r"\S+@\S+\.\S+")
_NON_ASCII_RE = re.compile(r"[^\x00-\x7f]+")
# Clause boundaries: sentence punctuation, newlines, and spaced dashes.
_CLAUSE_SPLIT_RE = re.compile(r"[.;!?\n\r]|\s[-–—]+\s|--+")
_COPYRIGHT_RE = re.compile(
    r"©|\(c\)\s*\d{4}|\bcopyright\b|\ball rights reserved\b", re.IGNORECASE)


def default_stopwords() -> frozenset[str]:
    text = resources.files("distillery").joinpath("data/stopwords.txt").read_text()
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


def load_stopwords(path: str | Path) -> frozenset[str]:
    with open(path) as fh:
        return frozenset(line.strip().lower() for line in fh if line.strip())


def load_substitutions(path: str | Path) -> dict[str, list[str]]:
    """Substitution map file: JSON object of canonical term -> list of forms."""
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise InvalidRecordError(f"{path}: substitution map must be a JSON object")
    return {str(k): [str(v) for v in forms] for k, forms in raw.items()}


@dataclass
class CleaningConfig:
    stopwords: frozenset[str] = field(default_factory=default_stopwords)
    substitutions: dict[str, list[str]] = field(default_factory=dict)
    non_ascii_ratio_max: float = 0.25
    min_stopword_hits: int = 2

    _sub_patterns: list[tuple[re.Pattern, str]] = field(init=False, repr=False)

    def __post_init__(self):
        self.stopwords = frozenset(w.lower() for w in self.stopwords)
        canon_map: dict[str, list[str]] = {}
        for canonical, forms in self.substitutions.items():
            canonical = canonical.strip().lower()
            if not _TOKEN_RE.fullmatch(canonical):
                raise InvalidRecordError(
                    f"canonical term {canonical!r} must be a single (possibly "
                    "hyphenated) token")
            if not forms:
                raise InvalidRecordError(f"term {canonical!r} has no surface forms")
            canon_map[canonical] = [f.strip() for f in forms if f.strip()]
        self.substitutions = canon_map
        # Longest surface first so "partial differential equation" wins over
        # any shorter overlapping form; whitespace/hyphens interchangeable.
        pairs = [(form, canonical)
                 for canonical, forms in canon_map.items()
                 for form in forms]
        pairs.sort(key=lambda p: len(p[0]), reverse=True)
        self._sub_patterns = [
            (re.compile(r"(?<![\w-])" + r"[\s_-]+".join(
                re.escape(part) for part in form.split()) + r"(?![\w-])",
                re.IGNORECASE), canonical)
            for form, canonical in pairs
        ]


def _drop_copyright_clauses(text: str) -> str:
    clauses = _CLAUSE_SPLIT_RE.split(text)
    return " ".join(c for c in clauses if c and not _COPYRIGHT_RE.search(c))


def clean_text(raw: str, config: CleaningConfig) -> list[str]:
    """Lowercased tokens with all noise classes removed; may be empty."""
    text = html.unescape(raw)
    text = _TAG_RE.sub(" ", text)
    text = _EMAIL_RE.sub(" ", text)
    text = _drop_copyright_clauses(text)
    for pattern, canonical in config._sub_patterns:
        text = pattern.sub(canonical, text)
    text = _NON_ASCII_RE.sub(" ", text)
    tokens = _TOKEN_RE.findall(text.lower())
    return [t for t in tokens if t not in config.stopwords]


def detect_english(raw: str, config: CleaningConfig) -> bool:
    """Two cheap heuristics: non-ASCII ratio and distinct stopword hits."""
    if not raw:
        return False
    non_ascii = sum(1 for ch in raw if ord(ch) > 127)
    if non_ascii / len(raw) > config.non_ascii_ratio_max:
        return False
    words = {w.lower() for w in _WORD_RE.findall(raw)}
    return len(words & config.stopwords) >= config.min_stopword_hits


@dataclass(frozen=True)
class Vocabulary:
    tokens: tuple[str, ...]
    source: str = "core-derived"

    def __post_init__(self):
        if len(set(self.tokens)) != len(self.tokens):
            raise VocabularyError("vocabulary tokens must be unique")
        if any((not t) or t != t.lower() for t in self.tokens):
            raise VocabularyError("vocabulary tokens must be nonempty and lowercase")
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.tokens)})

    def __len__(self) -> int:
        return len(self.tokens)

    def index(self, token: str) -> int | None:
        return self._index.get(token)

    def __contains__(self, token: str) -> bool:
        return token in self._index


def build_vocabulary(core_docs: Sequence[Sequence[str]], min_df: int = 1,
                     max_df_ratio: float = 1.0) -> Vocabulary:
    """Tokens appearing in at least min_df core docs and at most
    max_df_ratio of them; frozen thereafter."""
    if not core_docs:
        raise VocabularyError("cannot derive a vocabulary from zero documents")
    df: dict[str, int] = {}
    for doc in core_docs:
        for token in set(doc):
            df[token] = df.get(token, 0) + 1
    n = len(core_docs)
    kept = sorted(t for t, d in df.items() if d >= min_df and d <= max_df_ratio * n)
    if not kept:
        raise VocabularyError(
            f"all tokens filtered out (min_df={min_df}, max_df_ratio={max_df_ratio}); "
            "relax the thresholds")
    return Vocabulary(tokens=tuple(kept))


@dataclass
class TfidfMatrix:
    """Terms-by-documents nonnegative sparse matrix."""

    matrix: sp.csr_matrix
    vocabulary: Vocabulary
    doc_ids: list[str] | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape


@dataclass
class SppmiMatrix:
    """Symmetric terms-by-terms co-occurrence matrix, zero diagonal."""

    matrix: sp.csr_matrix
    vocabulary: Vocabulary
    window: int
    shift: int

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape


def tfidf(docs: Sequence[Sequence[str]], vocab: Vocabulary,
          doc_ids: Sequence[str] | None = None) -> TfidfMatrix:
    """Raw-count tf times smoothed idf: idf(t) = ln((1+n)/(1+df(t))) + 1.

    Out-of-vocabulary tokens are ignored, so off-topic documents show up as
    (near-)empty columns rather than new rows.
    """
    m, n = len(vocab), len(docs)
    counts: dict[tuple[int, int], int] = {}
    df = np.zeros(m, dtype=np.int64)
    for j, doc in enumerate(docs):
        seen: set[int] = set()
        for token in doc:
            i = vocab.index(token)
            if i is None:
                continue
            counts[(i, j)] = counts.get((i, j), 0) + 1
            seen.add(i)
        for i in seen:
            df[i] += 1
    idf = np.log((1.0 + n) / (1.0 + df)) + 1.0
    if counts:
        keys = np.array(list(counts.keys()), dtype=np.int64)
        rows, cols = keys[:, 0], keys[:, 1]
        vals = np.array(list(counts.values()), dtype=np.float64) * idf[rows]
    else:
        rows = cols = np.zeros(0, dtype=np.int64)
        vals = np.zeros(0, dtype=np.float64)
    matrix = sp.csr_matrix((vals, (rows, cols)), shape=(m, n))
    return TfidfMatrix(matrix=matrix, vocabulary=vocab,
                       doc_ids=list(doc_ids) if doc_ids is not None else None)


def sppmi(docs: Sequence[Sequence[str]], vocab: Vocabulary,
          window: int = 5, shift: int = 1) -> SppmiMatrix:
    """Shifted positive PMI over in-document co-occurrence windows.

    Out-of-vocabulary tokens are dropped before windowing. Co-occurrence is
    counted over ordered pairs within ``window`` positions, so the matrix is
    symmetric by construction; the diagonal is zeroed.
    """
    if window < 1:
        raise InvalidRecordError("window must be at least 1")
    if shift < 1:
        raise InvalidRecordError("shift must be a positive integer")
    m = len(vocab)
    pair_counts: dict[tuple[int, int], int] = {}
    for doc in docs:
        indexed = [i for i in (vocab.index(t) for t in doc) if i is not None]
        for p in range(len(indexed)):
            for q in range(p + 1, min(p + window + 1, len(indexed))):
                a, b = indexed[p], indexed[q]
                pair_counts[(a, b)] = pair_counts.get((a, b), 0) + 1
                pair_counts[(b, a)] = pair_counts.get((b, a), 0) + 1

    total = sum(pair_counts.values())
    marginal = np.zeros(m, dtype=np.float64)
    for (a, _b), c in pair_counts.items():
        marginal[a] += c

    rows, cols, vals = [], [], []
    log_shift = math.log(shift)
    for (a, b), c in pair_counts.items():
        if a == b:
            continue
        value = math.log(c * total / (marginal[a] * marginal[b])) - log_shift
        if value > 0.0:
            rows.append(a)
            cols.append(b)
            vals.append(value)
    matrix = sp.csr_matrix((vals, (rows, cols)), shape=(m, m))
    return SppmiMatrix(matrix=matrix, vocabulary=vocab, window=window, shift=shift)

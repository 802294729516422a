"""Session runtime: wires the store, citation client, embeddings, projection,
and pruning together behind a single-writer lock.

This is the one place that knows how the pieces fit; the CLI and the HTTP
service are thin shells over it.
"""

from __future__ import annotations

import itertools
import threading
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from distillery import citations as net
from distillery.citations import CitationClient, FixtureBackend, HttpBackend, TokenBucket
from distillery.config import SessionConfig
from distillery.embeddings import (
    EmbeddingMatrix,
    EmbeddingService,
    HashingProvider,
    PrecomputedProvider,
    RemoteProvider,
)
from distillery.errors import (
    EmptyCoreError,
    EmptySelectionError,
    StaleLayoutError,
    UnknownPaperError,
)
from distillery.geometry import (
    CompactnessReport,
    compactness,
    fit_hyperspheres,
    hypersphere_prune,
)
from distillery.projection import ProjectionLayout, ProjectionParams, project
from distillery.records import PaperId, PaperRecord
from distillery.selection import Selection, data_table, resolve_geometry, wordcloud
from distillery.store import Session
from distillery.textpipe import (
    CleaningConfig,
    Vocabulary,
    build_vocabulary,
    clean_text,
    load_stopwords,
    load_substitutions,
    sppmi,
    tfidf,
)
from distillery.topics import assign_topics, joint_factorize, prune_by_core_clusters, select_rank
from distillery import project_io


def build_client(config: SessionConfig, base_dir: Path | None = None) -> CitationClient:
    if config.fixtures_dir:
        fixtures = Path(config.fixtures_dir)
        if base_dir and not fixtures.is_absolute():
            fixtures = base_dir / fixtures
        backend = FixtureBackend(fixtures)
    else:
        backend = HttpBackend(
            config.api_base_url,
            api_key_env=config.api_key_env,
            bucket=TokenBucket(config.rate_per_s, config.rate_burst),
        )
    return CitationClient(
        backend,
        cache_dir=config.cache_dir,
        max_age_s=config.cache_max_age_s,
        max_in_flight=config.max_in_flight,
    )


def build_embedder(config: SessionConfig, base_dir: Path | None = None) -> EmbeddingService:
    if config.provider == "hashing":
        provider = HashingProvider(dimension=config.embedding_dim, seed=config.seed)
    elif config.provider == "remote":
        if not config.provider_url:
            raise EmptyCoreError("remote provider requires provider_url")
        provider = RemoteProvider(config.provider_url, dimension=config.embedding_dim)
    elif config.provider == "precomputed":
        if not config.provider_file:
            raise EmptyCoreError("precomputed provider requires provider_file")
        path = Path(config.provider_file)
        if base_dir and not path.is_absolute():
            path = base_dir / path
        provider = PrecomputedProvider(path)
    else:
        raise EmptyCoreError(f"unknown provider kind {config.provider!r}")
    return EmbeddingService(provider=provider)


def build_cleaning(config: SessionConfig, base_dir: Path | None = None) -> CleaningConfig:
    kwargs: dict[str, Any] = {
        "non_ascii_ratio_max": config.non_ascii_ratio_max,
        "min_stopword_hits": config.min_stopword_hits,
    }
    def _resolve(path_str: str) -> Path:
        path = Path(path_str)
        return base_dir / path if (base_dir and not path.is_absolute()) else path
    if config.stopword_file:
        kwargs["stopwords"] = load_stopwords(_resolve(config.stopword_file))
    if config.substitutions_file:
        kwargs["substitutions"] = load_substitutions(_resolve(config.substitutions_file))
    return CleaningConfig(**kwargs)


class SessionRuntime:
    """Mutations are serialized through one re-entrant lock; reads of mutable
    state take the same lock briefly, so readers never observe a half-applied
    mutation."""

    def __init__(self, session: Session, client: CitationClient | None = None,
                 embedder: EmbeddingService | None = None,
                 cleaning: CleaningConfig | None = None,
                 base_dir: Path | None = None):
        self.session = session
        self.base_dir = base_dir
        self.client = client or build_client(session.config, base_dir)
        self.embedder = embedder or build_embedder(session.config, base_dir)
        self.cleaning = cleaning or build_cleaning(session.config, base_dir)
        self.lock = threading.RLock()
        self.corpus_version = 0
        self._layout: ProjectionLayout | None = None
        self._layout_version = -1
        self.selections: dict[str, Selection] = {}
        self._selection_counter = itertools.count(1)
        self._token_cache: dict[PaperId, list[str]] = {}
        self.last_topic_report: dict[str, Any] | None = None

    # --- construction ---------------------------------------------------------

    @classmethod
    def create(cls, config: SessionConfig | None = None,
               base_dir: Path | None = None) -> "SessionRuntime":
        return cls(Session(config=config), base_dir=base_dir)

    @classmethod
    def load(cls, directory: str | Path) -> "SessionRuntime":
        directory = Path(directory)
        session, embeddings, layout_json = project_io.load_project(directory)
        runtime = cls(session, base_dir=directory)
        if embeddings:
            # Re-key stored vectors under the current provider fingerprint.
            for pid, vector in embeddings.items():
                record = session.archive.get(pid)
                if record is not None:
                    key = runtime.embedder._key(pid, record.embedding_text())
                    runtime.embedder._cache[key] = np.asarray(vector, dtype=np.float32)
        if layout_json:
            layout = ProjectionLayout.from_json(layout_json)
            if set(layout.ids) == set(session.member_ids()):
                runtime._layout = layout
                runtime._layout_version = runtime.corpus_version
        return runtime

    def save(self, directory: str | Path | None = None) -> Path:
        directory = Path(directory) if directory else self.base_dir
        if directory is None:
            raise EmptyCoreError("no project directory bound to this runtime")
        with self.lock:
            embeddings: dict[PaperId, np.ndarray] = {}
            for record in self.session.records():
                key = self.embedder._key(record.id, record.embedding_text())
                vector = self.embedder._cache.get(key)
                if vector is not None:
                    embeddings[record.id] = vector
            layout_json = None
            if self._layout is not None and self._layout_version == self.corpus_version:
                layout_json = self._layout.to_json()
            return project_io.save_project(self.session, directory,
                                           embeddings=embeddings or None,
                                           layout=layout_json)

    # --- internal bookkeeping ---------------------------------------------------

    def _mutated(self) -> None:
        self.corpus_version += 1

    # --- mutations ---------------------------------------------------------------

    def add_core(self, records: list[PaperRecord]) -> None:
        with self.lock:
            self.session.add_core(records)
            self._mutated()

    def add_core_by_ids(self, ids: Sequence[PaperId]) -> None:
        records = [self.client.fetch_paper(pid) for pid in ids]
        self.add_core(records)

    def hop(self, direction: str, extra_params: dict[str, Any] | None = None) -> net.HopResult:
        with self.lock:
            result = net.hop(self.session, self.client, direction)
            if extra_params:
                self.session.journal[-1].parameters.update(extra_params)
            self._mutated()
            return result

    def hop_preview(self, direction: str) -> int:
        with self.lock:
            return net.hop_preview(self.session, direction)

    def prune_manual(self, ids: Sequence[PaperId] | None = None,
                     selection_id: str | None = None, skip_core: bool = False,
                     extra_params: dict[str, Any] | None = None) -> dict[str, Any]:
        with self.lock:
            params: dict[str, Any] = dict(extra_params or {})
            if selection_id is not None:
                selection = self._get_selection(selection_id)
                ids = selection.resolved_ids
                params["selection_id"] = selection_id
            if ids is None:
                raise EmptySelectionError("manual prune needs ids or a selection id")
            ids = list(ids)
            if skip_core:
                ids = [pid for pid in ids if not self.session.archive[pid].is_core]
            self.session.remove_papers(ids, kind="prune-manual", parameters=params)
            self._mutated()
            return {"removed": len(ids)}

    def prune_hypersphere(self, anchor_ids: Sequence[PaperId] | None = None,
                          extra_params: dict[str, Any] | None = None) -> dict[str, Any]:
        with self.lock:
            matrix = self.embeddings()
            anchors = list(anchor_ids) if anchor_ids else self.session.core_ids()
            model = fit_hyperspheres(matrix.subset(anchors))
            kept, pruned = hypersphere_prune(model, matrix)
            removable = sorted(pid for pid in pruned
                               if not self.session.archive[pid].is_core)
            params = {"radius": model.radius, "n_anchors": len(anchors),
                      "n_pruned": len(removable), **(extra_params or {})}
            self.session.remove_papers(removable, kind="prune-hypersphere",
                                       parameters=params)
            self._mutated()
            return {"radius": model.radius, "kept": len(kept),
                    "removed": len(removable)}

    def prune_topics(self, k_range: Sequence[int] | None = None,
                     alpha: float | None = None,
                     extra_params: dict[str, Any] | None = None) -> dict[str, Any]:
        with self.lock:
            config = self.session.config
            records = self.session.records()
            if not records:
                raise EmptyCoreError("cannot run topic pruning on an empty corpus")
            docs = [self.tokens_for(record) for record in records]
            doc_ids = [str(record.id) for record in records]
            vocab = self.vocabulary()
            X = tfidf(docs, vocab, doc_ids=doc_ids)
            S = sppmi(docs, vocab, window=config.sppmi_window, shift=config.sppmi_shift)

            ks = list(k_range) if k_range else list(range(config.k_min, config.k_max + 1))
            ks = [k for k in ks if 1 <= k <= min(X.shape)]
            if not ks:
                ks = [min(2, min(X.shape))]
            if len(ks) == 1:
                chosen_k, stability = ks[0], None
            else:
                selection = select_rank(
                    X, S, ks,
                    n_perturbations=config.n_perturbations,
                    noise=config.perturbation_noise,
                    seed=config.seed,
                    alpha=alpha if alpha is not None else config.nmf_alpha,
                    silhouette_floor=config.silhouette_floor,
                )
                chosen_k = selection.chosen_k
                stability = {
                    "chosen_k": selection.chosen_k,
                    "low_confidence": selection.low_confidence,
                    "candidates": [
                        {"k": c.k, "silhouette": round(c.silhouette, 6),
                         "rel_error": round(c.rel_error, 6)}
                        for c in selection.candidates
                    ],
                }

            fac = joint_factorize(
                X, S, chosen_k,
                alpha=alpha if alpha is not None else config.nmf_alpha,
                seed=config.seed, max_iter=config.nmf_max_iter, tol=config.nmf_tol)
            assignment = assign_topics(fac, doc_ids, tokens=vocab.tokens)
            core = [str(pid) for pid in self.session.core_ids()]
            kept, pruned = prune_by_core_clusters(assignment, core)
            removable = sorted(PaperId.from_str(s) for s in pruned)

            params = {"k": chosen_k, "alpha": fac.alpha,
                      "n_pruned": len(removable), **(extra_params or {})}
            if stability:
                params["stability"] = stability
            self.session.remove_papers(removable, kind="prune-topics", parameters=params)
            self._mutated()
            core_topics = sorted({assignment.doc_to_topic[c] for c in core})
            core_set = set(core)
            report = {
                "k": chosen_k,
                "alpha": fac.alpha,
                "kept": len(kept),
                "removed": len(removable),
                "core_topics": core_topics,
                "top_words": {str(t): [w for w, _ in assignment.top_words.get(t, [])]
                              for t in core_topics},
                "topics": [
                    {
                        "index": t,
                        "has_core": t in core_topics,
                        "documents": docs_in_topic,
                        "n_core": sum(d in core_set for d in docs_in_topic),
                        "top_words": [[w, round(weight, 6)] for w, weight
                                      in assignment.top_words.get(t, [])],
                    }
                    for t, docs_in_topic in sorted(assignment.topic_to_docs.items())
                ],
                "stability": stability,
            }
            self.last_topic_report = report
            return report

    def undo(self) -> None:
        with self.lock:
            self.session.undo()
            self._mutated()

    # --- reads ---------------------------------------------------------------------

    def embeddings(self) -> EmbeddingMatrix:
        with self.lock:
            records = self.session.records()
            if not records:
                raise EmptyCoreError("the corpus is empty; add a core first")
            return self.embedder.embed_records(records)

    def compactness(self) -> CompactnessReport:
        return compactness(self.embeddings())

    def layout(self, params: ProjectionParams | None = None) -> ProjectionLayout:
        """Current 2-D layout, recomputed lazily after corpus mutations."""
        with self.lock:
            if params is None:
                config = self.session.config
                params = ProjectionParams(
                    n_neighbors=config.n_neighbors,
                    min_dist=config.min_dist,
                    n_epochs=config.n_epochs,
                    seed=config.seed,
                )
            stale = (self._layout is None
                     or self._layout_version != self.corpus_version
                     or self._layout.params != params)
            if stale:
                self._layout = project(self.embeddings(), params)
                self._layout_version = self.corpus_version
            return self._layout

    def scatter(self) -> list[dict[str, Any]]:
        with self.lock:
            layout = self.layout()
            out = []
            for pid, (x, y) in zip(layout.ids, layout.coords):
                record = self.session.archive[pid]
                out.append({"id": str(pid), "x": float(x), "y": float(y),
                            "hop": record.hop, "is_core": record.is_core})
            return out

    def tokens_for(self, record: PaperRecord) -> list[str]:
        cached = self._token_cache.get(record.id)
        if cached is None:
            cached = clean_text(record.embedding_text(), self.cleaning)
            self._token_cache[record.id] = cached
        return cached

    def vocabulary(self) -> Vocabulary:
        """Derived from the core documents; identical at every hop because the
        core never changes after expansion starts."""
        with self.lock:
            core = [self.session.archive[pid] for pid in self.session.core_ids()]
            if not core:
                raise EmptyCoreError("no core papers; cannot derive a vocabulary")
            docs = [self.tokens_for(record) for record in core]
            config = self.session.config
            return build_vocabulary(docs, min_df=config.min_df,
                                    max_df_ratio=config.max_df_ratio)

    # --- selections -------------------------------------------------------------

    def make_selection(self, geometry: dict[str, Any]) -> Selection:
        with self.lock:
            layout = self.layout()
            if self._layout_version != self.corpus_version:
                raise StaleLayoutError("layout predates the corpus; re-project first")
            resolved = resolve_geometry(layout, geometry)
            selection = Selection(
                selection_id=f"sel-{next(self._selection_counter)}",
                geometry=geometry,
                resolved_ids=resolved,
                layout_version=self._layout_version,
            )
            self.selections[selection.selection_id] = selection
            return selection

    def _get_selection(self, selection_id: str) -> Selection:
        selection = self.selections.get(selection_id)
        if selection is None:
            raise UnknownPaperError(f"no selection {selection_id!r}")
        if selection.layout_version != self.corpus_version:
            raise StaleLayoutError(
                f"selection {selection_id} predates the last corpus mutation")
        return selection

    def selection_records(self, selection_id: str) -> list[PaperRecord]:
        with self.lock:
            selection = self._get_selection(selection_id)
            return [self.session.record(pid) for pid in selection.resolved_ids]

    def selection_wordcloud(self, selection_id: str, top_n: int = 50) -> list[tuple[str, int]]:
        return wordcloud(self.selection_records(selection_id), self.cleaning, top_n=top_n)

    def selection_table(self, selection_id: str) -> list[dict[str, Any]]:
        return data_table(self.selection_records(selection_id))

    # --- export ------------------------------------------------------------------

    def export_corpus_jsonl(self) -> str:
        with self.lock:
            import json
            return "\n".join(json.dumps(record.to_json(), sort_keys=True,
                                        ensure_ascii=False)
                             for record in self.session.records())

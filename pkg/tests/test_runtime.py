import numpy as np
import pytest

from distillery.embeddings import EmbeddingService
from distillery.errors import EmptyCoreError, StaleLayoutError, UnknownPaperError
from distillery.records import PaperId
from distillery.runtime import SessionRuntime
from distillery.textpipe import tfidf

from .conftest import CORE_DOIS, OFF_TOPIC, make_fixture_config


class CountingEmbedder(EmbeddingService):
    def __init__(self, provider):
        super().__init__(provider=provider)
        self.provider_calls = 0
        original = provider.embed

        def counted(ids, texts):
            self.provider_calls += 1
            return original(ids, texts)

        provider.embed = counted


class TestVocabularyFreeze:
    def test_vocabulary_identical_across_hops(self, fixture_runtime):
        runtime = fixture_runtime
        vocab_before = runtime.vocabulary()
        runtime.hop("citations")
        vocab_after = runtime.vocabulary()
        assert vocab_before.tokens == vocab_after.tokens

    def test_matrices_keep_core_term_axis(self, fixture_runtime):
        runtime = fixture_runtime
        vocab = runtime.vocabulary()
        m = len(vocab)
        runtime.hop("citations")
        docs = [runtime.tokens_for(r) for r in runtime.session.records()]
        X = tfidf(docs, runtime.vocabulary())
        assert X.shape == (m, 19)

    def test_no_core_no_vocabulary(self):
        runtime = SessionRuntime.create(make_fixture_config())
        with pytest.raises(EmptyCoreError):
            runtime.vocabulary()


class TestLayoutLifecycle:
    def test_layout_cached_until_mutation(self, fixture_runtime):
        runtime = fixture_runtime
        first = runtime.layout()
        second = runtime.layout()
        assert first is second
        runtime.hop("citations")
        third = runtime.layout()
        assert third is not first
        assert len(third.ids) == 19

    def test_selection_goes_stale_after_mutation(self, fixture_runtime):
        runtime = fixture_runtime
        selection = runtime.make_selection(
            {"type": "ids", "ids": [f"doi:{CORE_DOIS[0]}"]})
        runtime.hop("citations")
        with pytest.raises(StaleLayoutError):
            runtime.selection_wordcloud(selection.selection_id)

    def test_unknown_selection_id(self, fixture_runtime):
        with pytest.raises(UnknownPaperError):
            fixture_runtime.selection_records("sel-404")


class TestPruneBookkeeping:
    def test_hypersphere_entry_parameters(self, fixture_runtime):
        runtime = fixture_runtime
        runtime.hop("citations")
        summary = runtime.prune_hypersphere()
        entry = runtime.session.journal[-1]
        assert entry.kind == "prune-hypersphere"
        assert entry.parameters["radius"] == pytest.approx(summary["radius"])
        assert entry.parameters["n_pruned"] == 6
        assert {str(p) for p in entry.affected_ids} == \
               {f"doi:{d}" for d in sorted(OFF_TOPIC)[:6]}

    def test_topics_entry_parameters(self, fixture_runtime):
        runtime = fixture_runtime
        runtime.hop("citations")
        runtime.prune_hypersphere()
        summary = runtime.prune_topics(k_range=[3])
        entry = runtime.session.journal[-1]
        assert entry.kind == "prune-topics"
        assert entry.parameters["k"] == 3 == summary["k"]

    def test_anchor_override(self, fixture_runtime):
        runtime = fixture_runtime
        runtime.hop("citations")
        anchors = [PaperId.doi(d) for d in CORE_DOIS[:2]]
        summary = runtime.prune_hypersphere(anchor_ids=anchors)
        assert runtime.session.journal[-1].parameters["n_anchors"] == 2
        assert summary["removed"] >= 6


class TestPersistence:
    def test_save_load_reuses_embeddings(self, tmp_path, api_fixtures_dir):
        config = make_fixture_config(embedding_dim=32, n_epochs=20)
        runtime = SessionRuntime.create(config, base_dir=tmp_path)
        runtime.add_core_by_ids([PaperId.doi(d) for d in CORE_DOIS])
        before = runtime.embeddings()
        runtime.layout()
        runtime.save()

        loaded = SessionRuntime.load(tmp_path)
        embedder = CountingEmbedder(loaded.embedder.provider)
        loaded.embedder._cache.update(embedder._cache)
        # swap in the counting wrapper with the persisted cache
        embedder._cache = loaded.embedder._cache
        loaded.embedder = embedder
        after = loaded.embeddings()
        assert embedder.provider_calls == 0  # cache hit from embeddings.bin
        np.testing.assert_array_equal(before.vectors, after.vectors)

    def test_save_load_restores_layout(self, tmp_path):
        config = make_fixture_config(embedding_dim=32, n_epochs=20)
        runtime = SessionRuntime.create(config, base_dir=tmp_path)
        runtime.add_core_by_ids([PaperId.doi(d) for d in CORE_DOIS])
        layout = runtime.layout()
        runtime.save()
        loaded = SessionRuntime.load(tmp_path)
        np.testing.assert_array_equal(loaded.layout().coords, layout.coords)

    def test_save_without_directory_rejected(self):
        runtime = SessionRuntime.create(make_fixture_config())
        with pytest.raises(EmptyCoreError):
            runtime.save()

import itertools

import numpy as np
import pytest
import scipy.sparse as sp

from distillery.errors import FactorizationError
from distillery.topics import (
    Factorization,
    assign_topics,
    default_alpha,
    joint_factorize,
    prune_by_core_clusters,
    select_rank,
)


def planted_model(seed: int, m: int = 120, n: int = 90, k: int = 3,
                  fill: float = 0.6, noise_mult: float = 0.25,
                  background: float = 0.02):
    """Disjoint-vocabulary topic blocks plus mild noise; the generator is the
    oracle for recovery and rank-selection tests."""
    rng = np.random.default_rng(seed)
    X = np.zeros((m, n))
    mb, nb = m // k, n // k
    for b in range(k):
        block = ((rng.random((mb, nb)) < fill)
                 * rng.uniform(0.5, 1.5, (mb, nb)))
        X[b * mb:(b + 1) * mb, b * nb:(b + 1) * nb] = block
    X *= rng.uniform(1 - noise_mult, 1 + noise_mult, X.shape)
    X += background * rng.random(X.shape)
    labels = np.repeat(np.arange(k), nb)
    return sp.csr_matrix(X), labels


def random_symmetric(seed: int, m: int, density: float = 0.1) -> sp.csr_matrix:
    rng = np.random.default_rng(seed)
    dense = (rng.random((m, m)) < density) * rng.random((m, m))
    dense = np.triu(dense, k=1)
    return sp.csr_matrix(dense + dense.T)


def best_permutation_agreement(got: np.ndarray, truth: np.ndarray, k: int) -> float:
    best = 0.0
    for perm in itertools.permutations(range(k)):
        mapped = np.array([perm[g] for g in got])
        best = max(best, float(np.mean(mapped == truth)))
    return best


class TestJointFactorize:
    def test_rank_one_exact_recovery(self):
        X = sp.csr_matrix(np.array([[1.0, 2.0], [2.0, 4.0]]))
        S = sp.csr_matrix((2, 2))
        fac = joint_factorize(X, S, k=1, alpha=0.0, seed=0,
                              max_iter=2000, tol=1e-14)
        residual = np.linalg.norm(X.toarray() - fac.W @ fac.H)
        assert residual / np.linalg.norm(X.toarray()) < 1e-6

    @pytest.mark.parametrize("alpha", [0.0, 0.1, 1.0])
    def test_objective_trace_never_increases(self, alpha):
        for seed in range(20):
            rng = np.random.default_rng(seed)
            X = sp.csr_matrix((rng.random((25, 18)) < 0.4) * rng.random((25, 18)))
            if X.nnz == 0:
                continue
            S = random_symmetric(seed + 1000, 25)
            fac = joint_factorize(X, S, k=4, alpha=alpha, seed=seed, max_iter=60)
            trace = np.array(fac.objective_trace)
            assert np.all(trace[1:] <= trace[:-1] * (1 + 1e-10) + 1e-10), (
                f"objective increased at seed {seed}, alpha {alpha}")

    def test_nonnegativity_of_factors(self):
        X, _ = planted_model(3, m=40, n=30)
        S = random_symmetric(4, 40)
        fac = joint_factorize(X, S, k=3, alpha=0.5, seed=3, max_iter=80)
        assert (fac.W >= 0).all() and (fac.H >= 0).all()

    def test_seed_determinism_bitwise(self):
        X, _ = planted_model(5, m=30, n=24)
        S = random_symmetric(6, 30)
        a = joint_factorize(X, S, k=3, alpha=0.2, seed=11, max_iter=50)
        b = joint_factorize(X, S, k=3, alpha=0.2, seed=11, max_iter=50)
        np.testing.assert_array_equal(a.W, b.W)
        np.testing.assert_array_equal(a.H, b.H)
        assert a.objective_trace == b.objective_trace

    def test_invalid_rank_rejected(self):
        X = sp.csr_matrix(np.ones((4, 3)))
        S = sp.csr_matrix((4, 4))
        with pytest.raises(FactorizationError):
            joint_factorize(X, S, k=0)
        with pytest.raises(FactorizationError):
            joint_factorize(X, S, k=4)  # > min(m, n)

    def test_all_zero_matrix_rejected(self):
        with pytest.raises(FactorizationError):
            joint_factorize(sp.csr_matrix((5, 5)), sp.csr_matrix((5, 5)), k=2)

    def test_mismatched_s_rejected(self):
        X = sp.csr_matrix(np.ones((4, 3)))
        with pytest.raises(FactorizationError):
            joint_factorize(X, sp.csr_matrix((3, 3)), k=2)

    def test_planted_partition_recovered(self):
        X, truth = planted_model(17)
        S = sp.csr_matrix((120, 120))
        fac = joint_factorize(X, S, k=3, alpha=0.0, seed=17, max_iter=400, tol=1e-9)
        assignment = assign_topics(fac, [f"d{j}" for j in range(90)])
        got = np.array([assignment.doc_to_topic[f"d{j}"] for j in range(90)])
        assert best_permutation_agreement(got, truth, 3) >= 0.95

    def test_coupling_pulls_w_toward_s_structure(self):
        # with a strongly block-diagonal S, alpha > 0 must reduce the S-residual
        X, _ = planted_model(9, m=30, n=24, noise_mult=0.4)
        blocks = np.zeros((30, 30))
        for b in range(3):
            blocks[b * 10:(b + 1) * 10, b * 10:(b + 1) * 10] = 1.0
        np.fill_diagonal(blocks, 0.0)
        S = sp.csr_matrix(blocks)
        plain = joint_factorize(X, S, k=3, alpha=0.0, seed=2, max_iter=200)
        coupled = joint_factorize(X, S, k=3, alpha=5.0, seed=2, max_iter=200)

        def s_residual(fac: Factorization) -> float:
            return float(np.linalg.norm(S.toarray() - fac.W @ fac.W.T))

        assert s_residual(coupled) < s_residual(plain)


class TestDefaultAlpha:
    def test_scales_with_matrix_norms(self):
        X = sp.csr_matrix(np.full((4, 4), 2.0))
        S = sp.csr_matrix(np.full((4, 4), 1.0))
        assert default_alpha(X, S) == pytest.approx(0.1 * 4.0)

    def test_zero_s_gives_zero(self):
        X = sp.csr_matrix(np.ones((3, 3)))
        assert default_alpha(X, sp.csr_matrix((3, 3))) == 0.0


class TestSelectRank:
    def test_planted_three_topics_chosen_across_seeds(self):
        S = sp.csr_matrix((120, 120))
        hits = 0
        for seed in range(10):
            X, _ = planted_model(seed)
            sel = select_rank(X, S, range(2, 9), n_perturbations=10, noise=0.03,
                              seed=seed, alpha=0.0, max_iter=150, tol=1e-5)
            hits += (sel.chosen_k == 3)
        assert hits >= 9

    def test_single_candidate_is_chosen(self):
        X, _ = planted_model(0, m=40, n=30)
        sel = select_rank(X, sp.csr_matrix((40, 40)), [4], n_perturbations=3,
                          seed=0, alpha=0.0, max_iter=50)
        assert sel.chosen_k == 4

    def test_no_stable_rank_flags_low_confidence(self):
        rng = np.random.default_rng(0)
        X = sp.csr_matrix(rng.random((30, 20)))  # structureless
        sel = select_rank(X, sp.csr_matrix((30, 30)), range(4, 7),
                          n_perturbations=4, seed=0, alpha=0.0, max_iter=40,
                          silhouette_floor=0.999)
        assert sel.low_confidence
        assert sel.chosen_k in (4, 5, 6)

    def test_deterministic_given_seed(self):
        X, _ = planted_model(4, m=40, n=30)
        S = sp.csr_matrix((40, 40))
        a = select_rank(X, S, range(2, 5), n_perturbations=4, seed=9,
                        alpha=0.0, max_iter=40)
        b = select_rank(X, S, range(2, 5), n_perturbations=4, seed=9,
                        alpha=0.0, max_iter=40)
        assert a.chosen_k == b.chosen_k
        assert [(c.k, c.silhouette, c.rel_error) for c in a.candidates] == \
               [(c.k, c.silhouette, c.rel_error) for c in b.candidates]

    def test_empty_range_rejected(self):
        with pytest.raises(FactorizationError):
            select_rank(sp.csr_matrix(np.ones((4, 4))), sp.csr_matrix((4, 4)), [])


class TestAssignTopics:
    def _fac(self, H: np.ndarray) -> Factorization:
        k = H.shape[0]
        return Factorization(W=np.ones((2, k)), H=H, k=k, alpha=0.0,
                             objective_trace=[0.0], converged=True)

    def test_argmax_assignment(self):
        fac = self._fac(np.array([[0.9, 0.1], [0.1, 0.9]]))
        assignment = assign_topics(fac, ["a", "b"])
        assert assignment.doc_to_topic == {"a": 0, "b": 1}

    def test_tie_breaks_toward_lowest_topic(self):
        fac = self._fac(np.array([[0.5], [0.5]]))
        assignment = assign_topics(fac, ["a"])
        assert assignment.doc_to_topic["a"] == 0

    def test_top_words_ordered_by_weight(self):
        W = np.array([[0.1, 3.0], [2.0, 0.2], [0.5, 0.1]])
        H = np.array([[1.0], [0.0]])
        fac = Factorization(W=W, H=H, k=2, alpha=0.0,
                            objective_trace=[0.0], converged=True)
        assignment = assign_topics(fac, ["d"], tokens=["u", "v", "w"], top_n=2)
        assert [w for w, _ in assignment.top_words[0]] == ["v", "w"]
        assert [w for w, _ in assignment.top_words[1]] == ["u", "v"]

    def test_doc_count_mismatch_rejected(self):
        fac = self._fac(np.array([[1.0, 2.0]]))
        with pytest.raises(FactorizationError):
            assign_topics(fac, ["only-one"])


class TestPruneByCoreClusters:
    def test_simple_retention(self):
        fac = Factorization(W=np.ones((2, 2)),
                            H=np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]),
                            k=2, alpha=0.0, objective_trace=[0.0], converged=True)
        assignment = assign_topics(fac, ["c1", "d1", "d2"])
        kept, pruned = prune_by_core_clusters(assignment, ["c1"])
        assert kept == {"c1", "d1"} and pruned == {"d2"}

    def test_all_topics_with_core_prune_nothing(self):
        fac = Factorization(W=np.ones((2, 2)),
                            H=np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]),
                            k=2, alpha=0.0, objective_trace=[0.0], converged=True)
        assignment = assign_topics(fac, ["c1", "c2", "d1"])
        kept, pruned = prune_by_core_clusters(assignment, ["c1", "c2"])
        assert pruned == set()

    def test_unassigned_core_rejected(self):
        fac = Factorization(W=np.ones((2, 1)), H=np.array([[1.0]]), k=1,
                            alpha=0.0, objective_trace=[0.0], converged=True)
        assignment = assign_topics(fac, ["d1"])
        with pytest.raises(FactorizationError):
            prune_by_core_clusters(assignment, ["missing-core"])

    def test_matches_set_oracle_on_randomized_assignments(self):
        rng = np.random.default_rng(123)
        for _ in range(1000):
            n_docs = int(rng.integers(1, 40))
            k = int(rng.integers(1, 8))
            labels = rng.integers(0, k, size=n_docs)
            docs = [f"d{j}" for j in range(n_docs)]
            n_core = int(rng.integers(1, n_docs + 1))
            core = [docs[i] for i in rng.choice(n_docs, n_core, replace=False)]
            assignment = assign_topics(
                Factorization(W=np.ones((1, k)),
                              H=np.eye(k)[:, labels], k=k, alpha=0.0,
                              objective_trace=[0.0], converged=True), docs)
            kept, pruned = prune_by_core_clusters(assignment, core)
            core_topics = {labels[docs.index(c)] for c in core}
            for j, doc in enumerate(docs):
                assert (doc in kept) == (labels[j] in core_topics)
                assert (doc in pruned) == (labels[j] not in core_topics)
            assert set(core) <= kept

"""Joint semantic NMF with automatic rank selection, and cluster pruning.

The factorization minimizes ``|X - WH|_F^2 + alpha * |S - WW^T|_F^2`` over
nonnegative W (words-by-topics) and H (topics-by-documents) with damped
multiplicative updates. Each W step is guarded by backtracking on the
damping factor, so the recorded objective trace is non-increasing by
construction, not by hope.

Rank selection factorizes several multiplicatively perturbed copies of X per
candidate rank, clusters the pooled W columns by cosine similarity, and
scores each rank by mean silhouette; the chosen rank is the largest stable
one whose reconstruction error still sits inside the error elbow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from distillery.errors import FactorizationError
from distillery.textpipe import SppmiMatrix, TfidfMatrix

_EPS = 1e-12
_DENSE_LIMIT = 4_000_000  # m*n above this, use trace identities for the objective


@dataclass
class Factorization:
    W: np.ndarray
    H: np.ndarray
    k: int
    alpha: float
    objective_trace: list[float]
    converged: bool


@dataclass
class RankCandidate:
    k: int
    silhouette: float
    rel_error: float


@dataclass
class RankSelection:
    candidates: list[RankCandidate]
    chosen_k: int
    low_confidence: bool
    params: dict[str, Any] = field(default_factory=dict)


@dataclass
class TopicAssignment:
    doc_to_topic: dict[str, int]
    topic_to_docs: dict[int, list[str]]
    top_words: dict[int, list[tuple[str, float]]]


def _as_sparse(matrix) -> sp.csr_matrix:
    if isinstance(matrix, TfidfMatrix) or isinstance(matrix, SppmiMatrix):
        matrix = matrix.matrix
    if sp.issparse(matrix):
        return matrix.tocsr().astype(np.float64)
    return sp.csr_matrix(np.asarray(matrix, dtype=np.float64))


def default_alpha(X: sp.csr_matrix, S: sp.csr_matrix) -> float:
    """0.1 * |X|_F^2 / |S|_F^2; zero when S carries no signal."""
    s_norm = float(S.multiply(S).sum())
    if s_norm <= 0.0:
        return 0.0
    return 0.1 * float(X.multiply(X).sum()) / s_norm


class _Objective:
    """Joint objective evaluator; dense residuals when affordable, exact
    trace identities otherwise."""

    def __init__(self, X: sp.csr_matrix, S: sp.csr_matrix, alpha: float):
        self.X = X
        self.S = S
        self.alpha = alpha
        self.dense = X.shape[0] * X.shape[1] <= _DENSE_LIMIT
        if self.dense:
            self._Xd = X.toarray()
            self._Sd = S.toarray()
        else:
            self._x_norm2 = float(X.multiply(X).sum())
            self._s_norm2 = float(S.multiply(S).sum())

    def __call__(self, W: np.ndarray, H: np.ndarray) -> float:
        if self.dense:
            r1 = self._Xd - W @ H
            value = float(np.sum(r1 * r1))
            if self.alpha > 0.0:
                r2 = self._Sd - W @ W.T
                value += self.alpha * float(np.sum(r2 * r2))
            return value
        xh = self.X @ H.T  # m x k
        wtw = W.T @ W
        hht = H @ H.T
        value = self._x_norm2 - 2.0 * float(np.sum(W * xh)) + float(np.sum(wtw * hht))
        if self.alpha > 0.0:
            sw = self.S @ W
            value += self.alpha * (self._s_norm2 - 2.0 * float(np.sum(W * sw))
                                   + float(np.sum(wtw * wtw)))
        return value


def _guarded_step(current: np.ndarray, ratio: np.ndarray, objective, evaluate,
                  beta: float = 0.5) -> tuple[np.ndarray, float]:
    """Damped multiplicative step with backtracking.

    The step direction current * (ratio - 1) has nonpositive directional
    derivative, so halving beta always finds a non-increasing point (we stop
    at the no-op in the worst case).
    """
    for _ in range(40):
        candidate = current * ((1.0 - beta) + beta * ratio)
        value = evaluate(candidate)
        if value <= objective * (1.0 + 1e-12) + 1e-300:
            return candidate, value
        beta *= 0.5
    return current, objective


def joint_factorize(X, S, k: int, alpha: float | None = None, seed: int = 0,
                    max_iter: int = 300, tol: float = 1e-7) -> Factorization:
    """Multiplicative-update factorization from seeded uniform init.

    Stops at ``max_iter`` or when the relative objective improvement drops
    below ``tol``.
    """
    X = _as_sparse(X)
    S = _as_sparse(S)
    m, n = X.shape
    if k < 1:
        raise FactorizationError("rank k must be at least 1")
    if k > min(m, n):
        raise FactorizationError(f"rank {k} exceeds min(m, n) = {min(m, n)}")
    if S.shape != (m, m):
        raise FactorizationError(f"S must be {m}x{m}, got {S.shape}")
    x_norm2 = float(X.multiply(X).sum())
    if x_norm2 <= 0.0:
        raise FactorizationError("X is all zeros; nothing to factorize")
    if alpha is None:
        alpha = default_alpha(X, S)
    if alpha < 0.0:
        raise FactorizationError("alpha must be nonnegative")

    rng = np.random.Generator(np.random.PCG64(seed))
    mean_x = float(X.sum()) / (m * n)
    scale = math.sqrt(max(mean_x, _EPS) / k)
    # 1 - random() lands in (0, 1]: multiplicative updates never unlock zeros.
    W = (1.0 - rng.random((m, k))) * scale
    H = (1.0 - rng.random((k, n))) * scale

    objective = _Objective(X, S, alpha)
    value = objective(W, H)
    trace = [value]
    converged = False

    for _ in range(max_iter):
        # H step: quadratic subproblem, classic multiplicative rule.
        numer = W.T @ X  # k x n
        denom = np.maximum((W.T @ W) @ H, _EPS)
        H, value = _guarded_step(H, np.asarray(numer) / denom, value,
                                 lambda Hc: objective(W, Hc), beta=1.0)
        # W step: quadratic + quartic coupling, damped and guarded.
        numer = np.asarray(X @ H.T)
        denom = W @ (H @ H.T)
        if alpha > 0.0:
            numer = numer + 2.0 * alpha * np.asarray(S @ W)
            denom = denom + 2.0 * alpha * (W @ (W.T @ W))
        W, value = _guarded_step(W, numer / np.maximum(denom, _EPS), value,
                                 lambda Wc: objective(Wc, H), beta=0.5)
        trace.append(value)
        previous = trace[-2]
        if previous - value <= tol * max(previous, _EPS):
            converged = True
            break

    return Factorization(W=W, H=H, k=k, alpha=float(alpha),
                         objective_trace=trace, converged=converged)


# --- rank selection ---------------------------------------------------------


def _cosine_matrix(columns: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(columns, axis=0)
    unit = columns / np.maximum(norms, _EPS)
    return np.clip(unit.T @ unit, -1.0, 1.0)


def _cluster_columns(pooled: list[np.ndarray], k: int) -> np.ndarray:
    """Greedy run-to-reference matching of W columns across perturbed runs.

    pooled[r] is the m x k factor of run r. Run 0 seeds the clusters; each
    later run's columns are matched to cluster centroids greedily by cosine
    similarity. Returns flat labels, run-major order.
    """
    m = pooled[0].shape[0]
    centroids = pooled[0] / np.maximum(np.linalg.norm(pooled[0], axis=0), _EPS)
    members: list[list[np.ndarray]] = [[centroids[:, c]] for c in range(k)]
    labels = [list(range(k))]
    for run in pooled[1:]:
        unit = run / np.maximum(np.linalg.norm(run, axis=0), _EPS)
        sim = centroids.T @ unit  # clusters x columns
        run_labels = [-1] * k
        free_clusters = set(range(k))
        free_columns = set(range(k))
        while free_columns:
            best = max(((c, j) for c in free_clusters for j in free_columns),
                       key=lambda cj: (sim[cj[0], cj[1]], -cj[0], -cj[1]))
            c, j = best
            run_labels[j] = c
            members[c].append(unit[:, j])
            free_clusters.discard(c)
            free_columns.discard(j)
        labels.append(run_labels)
        centroids = np.stack([
            _renorm(np.mean(np.stack(ms, axis=1), axis=1)) for ms in members
        ], axis=1)
    return np.array([lab for run_labels in labels for lab in run_labels])


def _renorm(v: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(v)
    return v / norm if norm > 0 else v


def _mean_silhouette(columns: np.ndarray, labels: np.ndarray) -> float:
    """Cosine-distance silhouette; singleton clusters score zero."""
    n = columns.shape[1]
    if n < 2 or len(set(labels.tolist())) < 2:
        return 0.0
    dist = 1.0 - _cosine_matrix(columns)
    scores = np.zeros(n)
    for i in range(n):
        own = labels == labels[i]
        own[i] = False
        if not own.any():
            scores[i] = 0.0
            continue
        a = dist[i, own].mean()
        b = min(dist[i, labels == other].mean()
                for other in set(labels.tolist()) if other != labels[i])
        scores[i] = 0.0 if max(a, b) == 0 else (b - a) / max(a, b)
    return float(scores.mean())


def select_rank(X, S, k_range: Iterable[int], n_perturbations: int = 10,
                noise: float = 0.03, seed: int = 0,
                alpha: float | None = None, max_iter: int = 200,
                tol: float = 1e-6, silhouette_floor: float = 0.75,
                improvement_floor: float = 0.05) -> RankSelection:
    """Bootstrap-stability rank scan.

    Chosen k = largest candidate whose mean silhouette clears the floor and
    whose reconstruction error still sits within the elbow (the last rank
    that materially improved the error). If nothing clears the floor the
    max-silhouette rank is returned flagged low-confidence.
    """
    X = _as_sparse(X)
    S = _as_sparse(S)
    ks = sorted(set(int(k) for k in k_range))
    if not ks:
        raise FactorizationError("k_range is empty")
    ks = [k for k in ks if 1 <= k <= min(X.shape)]
    if not ks:
        raise FactorizationError("no candidate rank fits the matrix shape")
    if n_perturbations < 2:
        raise FactorizationError("need at least 2 perturbations to measure stability")

    root = np.random.SeedSequence(seed)
    candidates: list[RankCandidate] = []
    for k, k_seq in zip(ks, root.spawn(len(ks))):
        pooled: list[np.ndarray] = []
        errors = []
        for run_seq in k_seq.spawn(n_perturbations):
            rng = np.random.Generator(np.random.PCG64(run_seq))
            Xp = X.copy()
            Xp.data = Xp.data * (1.0 + rng.uniform(-noise, noise, size=Xp.nnz))
            run_seed = int(run_seq.generate_state(1)[0])
            fac = joint_factorize(Xp, S, k, alpha=alpha, seed=run_seed,
                                  max_iter=max_iter, tol=tol)
            pooled.append(fac.W)
            xp_norm2 = float(Xp.multiply(Xp).sum())
            errors.append(math.sqrt(max(_x_residual2(Xp, fac.W, fac.H), 0.0)
                                    / max(xp_norm2, _EPS)))
        labels = _cluster_columns(pooled, k)
        columns = np.concatenate(pooled, axis=1)
        sil = _mean_silhouette(columns, labels) if k > 1 else 0.0
        candidates.append(RankCandidate(k=k, silhouette=sil,
                                        rel_error=float(np.mean(errors))))

    # Error elbow: the last rank that still improved the mean error by at
    # least improvement_floor relative to its predecessor.
    elbow_k = candidates[0].k
    for prev, cur in zip(candidates, candidates[1:]):
        if prev.rel_error - cur.rel_error >= improvement_floor * max(prev.rel_error, _EPS):
            elbow_k = cur.k
    stable = [c for c in candidates if c.silhouette >= silhouette_floor and c.k <= elbow_k]
    if stable:
        chosen = max(stable, key=lambda c: c.k)
        low_confidence = False
    else:
        chosen = max(candidates, key=lambda c: (c.silhouette, -c.k))
        low_confidence = True

    return RankSelection(
        candidates=candidates,
        chosen_k=chosen.k,
        low_confidence=low_confidence,
        params={
            "n_perturbations": n_perturbations,
            "noise": noise,
            "seed": seed,
            "silhouette_floor": silhouette_floor,
            "improvement_floor": improvement_floor,
            "elbow_k": elbow_k,
        },
    )


def _x_residual2(X: sp.csr_matrix, W: np.ndarray, H: np.ndarray) -> float:
    """|X - WH|_F^2, dense when affordable, trace identity otherwise."""
    if X.shape[0] * X.shape[1] <= _DENSE_LIMIT:
        r = X.toarray() - W @ H
        return float(np.sum(r * r))
    return (float(X.multiply(X).sum()) - 2.0 * float(np.sum(W * (X @ H.T)))
            + float(np.sum((W.T @ W) * (H @ H.T))))


# --- assignment and retention ------------------------------------------------


def assign_topics(factorization: Factorization, doc_ids: Sequence[str],
                  tokens: Sequence[str] | None = None,
                  top_n: int = 10) -> TopicAssignment:
    """Argmax over each H column; ties break toward the lowest topic index."""
    H = factorization.H
    if H.shape[1] != len(doc_ids):
        raise FactorizationError(
            f"{len(doc_ids)} doc ids for an H with {H.shape[1]} columns")
    winners = np.argmax(H, axis=0)  # argmax returns the first (lowest) index on ties
    doc_to_topic = {str(doc): int(winners[j]) for j, doc in enumerate(doc_ids)}
    topic_to_docs: dict[int, list[str]] = {t: [] for t in range(factorization.k)}
    for j, doc in enumerate(doc_ids):
        topic_to_docs[int(winners[j])].append(str(doc))

    top_words: dict[int, list[tuple[str, float]]] = {}
    if tokens is not None:
        W = factorization.W
        for t in range(factorization.k):
            order = np.argsort(-W[:, t], kind="stable")[:top_n]
            top_words[t] = [(tokens[i], float(W[i, t])) for i in order if W[i, t] > 0]
    return TopicAssignment(doc_to_topic=doc_to_topic, topic_to_docs=topic_to_docs,
                           top_words=top_words)


def prune_by_core_clusters(assignment: TopicAssignment,
                           core_ids: Iterable[str]) -> tuple[set[str], set[str]]:
    """Keep every document whose topic contains at least one core paper."""
    core = [str(c) for c in core_ids]
    missing = [c for c in core if c not in assignment.doc_to_topic]
    if missing:
        raise FactorizationError(f"core ids lack topic assignments: {missing[:3]}")
    core_topics = {assignment.doc_to_topic[c] for c in core}
    kept: set[str] = set()
    pruned: set[str] = set()
    for doc, topic in assignment.doc_to_topic.items():
        (kept if topic in core_topics else pruned).add(doc)
    return kept, pruned

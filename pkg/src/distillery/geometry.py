"""Embedding-space geometry: the compactness score and hypersphere pruning.

Compactness is the mean absolute cosine similarity over all ordered pairs of
document embeddings, so it always lands in [0, 1]; a single document scores
1.0 by convention. Hypersphere pruning keeps a candidate iff it lies within
Euclidean distance rho of at least one anchor embedding, where rho is the
median pairwise distance among the anchors (anchors default to the core set,
but any generation can serve).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist

from distillery.embeddings import EmbeddingMatrix
from distillery.errors import DimensionMismatchError, ZeroVectorError
from distillery.records import PaperId


@dataclass
class CompactnessReport:
    score: float
    n_documents: int


@dataclass
class HypersphereModel:
    core_ids: list[PaperId]
    core_embeddings: EmbeddingMatrix
    pairwise_distances: np.ndarray
    radius: float


def mean_abs_cosine(vectors: np.ndarray) -> float:
    """Mean |cos| over ordered pairs of rows; 1.0 for a single row."""
    arr = np.asarray(vectors, dtype=np.float64)
    n = arr.shape[0]
    if n == 0:
        raise ZeroVectorError("compactness needs at least one document")
    norms = np.linalg.norm(arr, axis=1)
    zero = np.nonzero(norms == 0.0)[0]
    if zero.size:
        raise ZeroVectorError(f"zero-norm embedding at row {zero[0]}")
    if n == 1:
        return 1.0
    unit = arr / norms[:, None]
    gram = np.abs(unit @ unit.T)
    total = float(gram.sum()) - float(np.trace(gram))
    return total / (n * (n - 1))


def compactness(matrix: EmbeddingMatrix) -> CompactnessReport:
    arr = matrix.vectors.astype(np.float64)
    norms = np.linalg.norm(arr, axis=1)
    zero = np.nonzero(norms == 0.0)[0]
    if zero.size:
        bad = [str(matrix.ids[i]) for i in zero]
        raise ZeroVectorError(f"zero-norm embedding for {bad[0]}", ids=bad)
    return CompactnessReport(score=mean_abs_cosine(arr), n_documents=matrix.n)


def fit_hyperspheres(anchors: EmbeddingMatrix) -> HypersphereModel:
    """Radius = median of all pairwise Euclidean anchor distances.

    An even pair count takes the midpoint of the two central order
    statistics. Duplicate anchors are fine (zero distances enter the pool).
    """
    if anchors.n < 2:
        raise ZeroVectorError("hypersphere radius needs at least two anchors")
    distances = pdist(anchors.vectors.astype(np.float64), metric="euclidean")
    return HypersphereModel(
        core_ids=list(anchors.ids),
        core_embeddings=anchors,
        pairwise_distances=distances,
        radius=float(np.median(distances)),
    )


def hypersphere_prune(model: HypersphereModel,
                      candidates: EmbeddingMatrix) -> tuple[set[PaperId], set[PaperId]]:
    """Split candidates into (kept, pruned). Boundary distances are kept;
    anchor papers themselves are always kept."""
    if candidates.dim != model.core_embeddings.dim:
        raise DimensionMismatchError(
            f"candidate dimension {candidates.dim} != anchor dimension "
            f"{model.core_embeddings.dim}")
    kept: set[PaperId] = set()
    pruned: set[PaperId] = set()
    if candidates.n == 0:
        return kept, pruned
    dists = cdist(candidates.vectors.astype(np.float64),
                  model.core_embeddings.vectors.astype(np.float64))
    nearest = dists.min(axis=1)
    anchor_ids = set(model.core_ids)
    for i, pid in enumerate(candidates.ids):
        if pid in anchor_ids or nearest[i] <= model.radius:
            kept.add(pid)
        else:
            pruned.add(pid)
    return kept, pruned

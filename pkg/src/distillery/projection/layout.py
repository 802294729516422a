"""End-to-end 2-D projection: kNN graph -> fuzzy weights -> SGD layout.

The pipeline is deterministic for a fixed seed in serial mode: exact brute
force neighbors, a PCA initialization (plain SVD, no iterative solver), and
a layout kernel driven by its own 64-bit PRNG.
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Any

import numpy as np
from scipy.optimize import curve_fit

from distillery.embeddings import EmbeddingMatrix
from distillery.errors import DimensionMismatchError
from distillery.records import PaperId
from distillery.projection import graph as _graph


def _select_kernel():
    if os.environ.get("DISTILLERY_PURE_PYTHON"):
        from distillery.projection import _kernel_py
        return _kernel_py, "python"
    try:
        from distillery.projection import _kernel
        return _kernel, "compiled"
    except ImportError:
        from distillery.projection import _kernel_py
        return _kernel_py, "python"


_KERNEL, KERNEL_BACKEND = _select_kernel()


@dataclass(frozen=True)
class ProjectionParams:
    n_neighbors: int = 15
    min_dist: float = 0.1
    n_epochs: int = 200
    seed: int = 0
    negative_sample_rate: int = 5

    def to_json(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "ProjectionParams":
        return cls(**{k: data[k] for k in
                      ("n_neighbors", "min_dist", "n_epochs", "seed",
                       "negative_sample_rate") if k in data})


@dataclass
class ProjectionLayout:
    ids: list[PaperId]
    coords: np.ndarray
    params: ProjectionParams = field(default_factory=ProjectionParams)

    def __post_init__(self):
        self.coords = np.asarray(self.coords, dtype=np.float64)
        if self.coords.shape != (len(self.ids), 2):
            raise DimensionMismatchError(
                f"layout shape {self.coords.shape} for {len(self.ids)} ids")
        if not np.all(np.isfinite(self.coords)):
            raise DimensionMismatchError("layout contains non-finite coordinates")

    def to_json(self) -> dict[str, Any]:
        return {
            "ids": [str(pid) for pid in self.ids],
            "coords": self.coords.tolist(),
            "params": self.params.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "ProjectionLayout":
        return cls(
            ids=[PaperId.from_str(s) for s in data["ids"]],
            coords=np.asarray(data["coords"], dtype=np.float64),
            params=ProjectionParams.from_json(data.get("params", {})),
        )


@lru_cache(maxsize=8)
def find_ab(min_dist: float, spread: float = 1.0) -> tuple[float, float]:
    """Least-squares fit of 1/(1 + a x^(2b)) to the offset exponential the
    min_dist/spread pair describes."""

    def curve(x, a, b):
        return 1.0 / (1.0 + a * x ** (2.0 * b))

    xv = np.linspace(0.0, spread * 3.0, 300)
    yv = np.where(xv < min_dist, 1.0, np.exp(-(xv - min_dist) / spread))
    (a, b), _ = curve_fit(curve, xv, yv)
    return float(a), float(b)


def _pca_init(X: np.ndarray, seed: int) -> np.ndarray:
    centered = X - X.mean(axis=0, keepdims=True)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    coords = centered @ vt[:2].T
    if coords.shape[1] < 2:  # can happen only for d < 2, which is rejected earlier
        coords = np.pad(coords, ((0, 0), (0, 2 - coords.shape[1])))
    peak = np.abs(coords).max()
    if peak > 0.0:
        coords = coords * (10.0 / peak)
    rng = np.random.Generator(np.random.PCG64(seed))
    return coords + rng.normal(scale=1e-4, size=coords.shape)


def project_array(X: np.ndarray, params: ProjectionParams) -> np.ndarray:
    """Project raw vectors; returns an n x 2 float64 array."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatchError("input must be a 2-D array")
    if not np.all(np.isfinite(X)):
        raise DimensionMismatchError("input contains non-finite values")
    n, d = X.shape
    if d < 2:
        raise DimensionMismatchError("projection needs input dimension >= 2")
    if n == 0:
        return np.zeros((0, 2))
    if n == 1:
        return np.zeros((1, 2))

    k = min(params.n_neighbors, n - 1)
    indices, dists = _graph.knn_graph(X, k)
    sigma, rho = _graph.smooth_knn(dists, float(k))
    head, tail, weight = _graph.fuzzy_edges(indices, dists, sigma, rho)
    coords = np.ascontiguousarray(_pca_init(X, params.seed))
    if head.shape[0] == 0:
        return coords
    epochs_per_sample = _graph.make_epochs_per_sample(weight, params.n_epochs)
    a, b = find_ab(params.min_dist)
    _KERNEL.optimize_layout(
        coords, head, tail, epochs_per_sample, params.n_epochs, a, b,
        1.0, 1.0, params.negative_sample_rate,
        params.seed & ((1 << 64) - 1),
    )
    return coords


def project(matrix: EmbeddingMatrix, params: ProjectionParams | None = None) -> ProjectionLayout:
    params = params or ProjectionParams()
    coords = project_array(matrix.vectors, params)
    return ProjectionLayout(ids=list(matrix.ids), coords=coords, params=params)


def trustworthiness(X: np.ndarray, coords: np.ndarray, k: int) -> float:
    """Neighborhood-preservation statistic in [0, 1].

    Penalizes layout neighbors that were far away in the input space,
    weighted by how far down the input ranking they sit.
    """
    X = np.asarray(X, dtype=np.float64)
    coords = np.asarray(coords, dtype=np.float64)
    n = X.shape[0]
    if coords.shape[0] != n:
        raise DimensionMismatchError("input and layout row counts differ")
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < n (k={k}, n={n})")
    if 2 * n - 3 * k - 1 <= 0:
        raise ValueError(f"k={k} is too large for the statistic at n={n}")

    def order_matrix(data: np.ndarray) -> np.ndarray:
        sq = np.einsum("ij,ij->i", data, data)
        dist = sq[:, None] + sq[None, :] - 2.0 * (data @ data.T)
        np.fill_diagonal(dist, np.inf)
        return np.argsort(dist, axis=1, kind="stable")

    input_order = order_matrix(X)
    layout_order = order_matrix(coords)

    ranks = np.empty((n, n), dtype=np.int64)
    rows = np.arange(n)[:, None]
    ranks[rows, input_order] = np.arange(n)[None, :] + 1  # 1-based input ranks

    penalty = 0
    for i in range(n):
        input_knn = set(input_order[i, :k].tolist())
        for j in layout_order[i, :k]:
            if int(j) not in input_knn:
                penalty += ranks[i, j] - k
    score = 1.0 - (2.0 / (n * k * (2.0 * n - 3.0 * k - 1.0))) * penalty
    return float(min(1.0, max(0.0, score)))

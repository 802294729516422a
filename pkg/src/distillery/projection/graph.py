"""kNN graph and fuzzy affinity weights for the 2-D layout.

Neighbors are exact (brute force, chunked); the corpus stays small enough
that approximate indexes would only cost determinism. Ties in distance are
broken by point index so the graph is reproducible.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

SMOOTH_K_TOLERANCE = 1e-5
MIN_K_DIST_SCALE = 1e-3


def knn_graph(X: np.ndarray, k: int, chunk: int = 512) -> tuple[np.ndarray, np.ndarray]:
    """Indices and Euclidean distances of the k nearest neighbors per row,
    self excluded, ties broken by index."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must be in [1, n-1], got k={k}, n={n}")
    sq_norms = np.einsum("ij,ij->i", X, X)
    indices = np.empty((n, k), dtype=np.int32)
    dists = np.empty((n, k), dtype=np.float64)
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        block = sq_norms[start:stop, None] + sq_norms[None, :] - 2.0 * (X[start:stop] @ X.T)
        np.maximum(block, 0.0, out=block)
        for row in range(start, stop):
            block[row - start, row] = np.inf  # mask self
        order = np.argsort(block, axis=1, kind="stable")[:, :k]
        indices[start:stop] = order.astype(np.int32)
        dists[start:stop] = np.sqrt(np.take_along_axis(block, order, axis=1))
    return indices, dists


def smooth_knn(dists: np.ndarray, k: float, n_iter: int = 64,
               local_connectivity: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Per-point bandwidth sigma and connectivity offset rho.

    sigma_i solves sum_j exp(-max(0, d_ij - rho_i) / sigma_i) = log2(k) by
    binary search; rho_i is the distance to the nearest nonzero neighbor.
    """
    n = dists.shape[0]
    target = np.log2(k)
    rho = np.zeros(n)
    sigma = np.zeros(n)
    mean_all = float(np.mean(dists)) if dists.size else 0.0

    for i in range(n):
        row = dists[i]
        nonzero = row[row > 0.0]
        if nonzero.shape[0] >= local_connectivity:
            index = int(np.floor(local_connectivity))
            interp = local_connectivity - index
            if index > 0:
                rho[i] = nonzero[index - 1]
                if interp > SMOOTH_K_TOLERANCE:
                    rho[i] += interp * (nonzero[index] - nonzero[index - 1])
            else:
                rho[i] = interp * nonzero[0]
        elif nonzero.shape[0] > 0:
            rho[i] = float(np.max(nonzero))

        lo, hi, mid = 0.0, np.inf, 1.0
        for _ in range(n_iter):
            psum = 0.0
            for j in range(row.shape[0]):
                d = row[j] - rho[i]
                psum += np.exp(-(d / mid)) if d > 0 else 1.0
            if abs(psum - target) < SMOOTH_K_TOLERANCE:
                break
            if psum > target:
                hi = mid
                mid = (lo + hi) / 2.0
            else:
                lo = mid
                mid = mid * 2.0 if hi == np.inf else (lo + hi) / 2.0
        sigma[i] = mid

        if rho[i] > 0.0:
            mean_row = float(np.mean(row))
            sigma[i] = max(sigma[i], MIN_K_DIST_SCALE * mean_row)
        else:
            sigma[i] = max(sigma[i], MIN_K_DIST_SCALE * mean_all)
    return sigma, rho


def fuzzy_edges(indices: np.ndarray, dists: np.ndarray, sigma: np.ndarray,
                rho: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Symmetrized membership graph as directed edge arrays.

    Directed strengths exp(-(d - rho_i)/sigma_i) are combined with the fuzzy
    union A + A^T - A*A^T. Both orientations of every edge are kept (each
    point must head its own edges so negative-sampling repulsion stays
    symmetric), sorted by (head, tail) for a fixed visit order.
    """
    n, k = indices.shape
    rows = np.repeat(np.arange(n, dtype=np.int64), k)
    cols = indices.reshape(-1).astype(np.int64)
    gap = dists - rho[:, None]
    vals = np.where(gap <= 0.0, 1.0,
                    np.exp(-gap / np.maximum(sigma[:, None], 1e-300))).reshape(-1)
    A = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    sym = ((A + A.T) - A.multiply(A.T)).tocoo()
    keep = (sym.data > 0.0) & (sym.row != sym.col)
    row, col, data = sym.row[keep], sym.col[keep], sym.data[keep]
    order = np.lexsort((col, row))
    return (row[order].astype(np.int32),
            col[order].astype(np.int32),
            data[order].astype(np.float64))


def make_epochs_per_sample(weights: np.ndarray, n_epochs: int) -> np.ndarray:
    """Stronger edges are visited more often: weight w is sampled every
    w_max / w epochs."""
    weights = np.asarray(weights, dtype=np.float64)
    out = np.full(weights.shape[0], -1.0)
    mask = weights > 0.0
    out[mask] = weights.max() / weights[mask]
    return out

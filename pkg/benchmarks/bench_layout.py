"""Benchmark: compiled layout kernel vs the pure-Python fallback.

Both kernels are run on the same fuzzy graph; besides timing them, the
script asserts their outputs are byte-identical (they share the arithmetic
op-for-op).

Run: python benchmarks/bench_layout.py [n_points] [n_epochs]
"""

from __future__ import annotations

import sys
import time

import numpy as np

from distillery.projection import find_ab
from distillery.projection import layout as L
from distillery.projection import graph as G
from distillery.projection import _kernel_py

try:
    from distillery.projection import _kernel
except ImportError:
    _kernel = None


def build_problem(n: int, d: int = 32, k: int = 15, seed: int = 42):
    rng = np.random.default_rng(seed)
    centers = rng.normal(scale=4.0, size=(4, d))
    X = np.concatenate([rng.normal(size=(n // 4, d)) + c for c in centers])
    indices, dists = G.knn_graph(X, k)
    sigma, rho = G.smooth_knn(dists, float(k))
    head, tail, weight = G.fuzzy_edges(indices, dists, sigma, rho)
    coords = L._pca_init(X, seed)
    return coords, head, tail, weight


def run(kernel, coords, head, tail, weight, n_epochs: int) -> tuple[np.ndarray, float]:
    work = np.ascontiguousarray(coords.copy())
    eps = G.make_epochs_per_sample(weight, n_epochs)
    a, b = find_ab(0.1)
    start = time.perf_counter()
    kernel.optimize_layout(work, head, tail, eps, n_epochs, a, b, 1.0, 1.0, 5, 42)
    return work, time.perf_counter() - start


def main() -> None:
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 2000
    n_epochs = int(sys.argv[2]) if len(sys.argv) > 2 else 50
    coords, head, tail, weight = build_problem(n)
    print(f"n={n} points, {head.shape[0]} edges, {n_epochs} epochs")

    py_coords, py_time = run(_kernel_py, coords, head, tail, weight, n_epochs)
    print(f"pure python : {py_time:8.3f} s")

    if _kernel is None:
        print("compiled    : not built (pip install -e . with a C toolchain)")
        return
    c_coords, c_time = run(_kernel, coords, head, tail, weight, n_epochs)
    print(f"compiled    : {c_time:8.3f} s   ({py_time / c_time:6.1f}x faster)")
    identical = np.array_equal(py_coords, c_coords)
    print(f"outputs byte-identical: {identical}")
    if not identical:
        raise SystemExit("kernel outputs diverged; backends are out of sync")


if __name__ == "__main__":
    main()

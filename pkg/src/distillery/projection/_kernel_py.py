"""Pure-Python layout kernel: the import-time fallback for the compiled one.

Every floating-point operation mirrors ``_kernel.pyx`` exactly (same order,
same splitmix64 stream), so both backends produce byte-identical layouts;
this one is simply slower. Plain lists and local bindings keep the inner
loop tolerable without compilation.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = (1 << 64) - 1


def _splitmix64(state: int) -> tuple[int, int]:
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, z ^ (z >> 31)


def optimize_layout(coords: np.ndarray, head: np.ndarray, tail: np.ndarray,
                    epochs_per_sample: np.ndarray, n_epochs: int,
                    a: float, b: float, gamma: float, initial_alpha: float,
                    negative_sample_rate: int, seed: int) -> None:
    """Stochastic-gradient layout refinement, in place. Serial, deterministic."""
    n_points = coords.shape[0]
    n_edges = head.shape[0]
    xs = coords[:, 0].tolist()
    ys = coords[:, 1].tolist()
    heads = head.tolist()
    tails = tail.tolist()
    eps = epochs_per_sample.tolist()
    next_sample = list(eps)
    eps_negative = [v / negative_sample_rate for v in eps]
    next_negative = list(eps_negative)

    pow_ = math.pow
    alpha = initial_alpha
    state, _ = _splitmix64(seed & _MASK)  # decorrelate from the raw seed

    for epoch in range(n_epochs):
        for e in range(n_edges):
            if next_sample[e] > epoch:
                continue
            i = heads[e]
            j = tails[e]

            dx = xs[i] - xs[j]
            dy = ys[i] - ys[j]
            dist_sq = dx * dx + dy * dy
            if dist_sq > 0.0:
                coeff = (-2.0 * a * b * pow_(dist_sq, b - 1.0)) / (a * pow_(dist_sq, b) + 1.0)
                gx = coeff * dx
                if gx > 4.0:
                    gx = 4.0
                elif gx < -4.0:
                    gx = -4.0
                gy = coeff * dy
                if gy > 4.0:
                    gy = 4.0
                elif gy < -4.0:
                    gy = -4.0
                xs[i] += alpha * gx
                ys[i] += alpha * gy
                xs[j] -= alpha * gx
                ys[j] -= alpha * gy
            next_sample[e] += eps[e]

            n_neg = int((epoch - next_negative[e]) / eps_negative[e])
            for _ in range(n_neg):
                state, z = _splitmix64(state)
                k = z % n_points
                dx = xs[i] - xs[k]
                dy = ys[i] - ys[k]
                dist_sq = dx * dx + dy * dy
                if dist_sq > 0.0:
                    coeff = (2.0 * gamma * b) / ((0.001 + dist_sq) * (a * pow_(dist_sq, b) + 1.0))
                    gx = coeff * dx
                    if gx > 4.0:
                        gx = 4.0
                    elif gx < -4.0:
                        gx = -4.0
                    gy = coeff * dy
                    if gy > 4.0:
                        gy = 4.0
                    elif gy < -4.0:
                        gy = -4.0
                    xs[i] += alpha * gx
                    ys[i] += alpha * gy
                elif j == k:
                    continue
                else:
                    # coincident strangers get a fixed shove apart
                    xs[i] += alpha * 4.0
                    ys[i] += alpha * 4.0
            next_negative[e] += n_neg * eps_negative[e]

        alpha = initial_alpha * (1.0 - ((epoch + 1) / n_epochs))

    coords[:, 0] = xs
    coords[:, 1] = ys

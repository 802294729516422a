# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled layout-optimization kernel.

Must stay arithmetic-identical to ``_kernel_py`` (same operation order, same
splitmix64 stream, no FMA contraction) so the backend choice never changes
results, only speed.
"""

from libc.math cimport pow

ctypedef unsigned long long u64

cdef inline double clip(double value) nogil:
    if value > 4.0:
        return 4.0
    if value < -4.0:
        return -4.0
    return value

cdef inline u64 splitmix64(u64* state) nogil:
    cdef u64 z
    state[0] = state[0] + <u64>0x9E3779B97F4A7C15
    z = state[0]
    z = (z ^ (z >> 30)) * <u64>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <u64>0x94D049BB133111EB
    return z ^ (z >> 31)


def optimize_layout(double[:, ::1] coords, int[::1] head, int[::1] tail,
                    double[::1] epochs_per_sample, int n_epochs,
                    double a, double b, double gamma, double initial_alpha,
                    int negative_sample_rate, unsigned long long seed):
    """Stochastic-gradient layout refinement, in place. Serial, deterministic."""
    cdef Py_ssize_t n_points = coords.shape[0]
    cdef Py_ssize_t n_edges = head.shape[0]
    cdef double alpha = initial_alpha
    cdef u64 state = seed
    cdef Py_ssize_t e, p, epoch
    cdef int i, j, k, n_neg
    cdef double dx, dy, dist_sq, coeff, gx, gy

    cdef double[::1] next_sample = epochs_per_sample.copy()
    cdef double[::1] eps_negative = epochs_per_sample.copy()
    cdef double[::1] next_negative = epochs_per_sample.copy()
    for e in range(n_edges):
        eps_negative[e] = epochs_per_sample[e] / negative_sample_rate
        next_negative[e] = eps_negative[e]

    splitmix64(&state)  # decorrelate from the raw seed

    for epoch in range(n_epochs):
        for e in range(n_edges):
            if next_sample[e] > epoch:
                continue
            i = head[e]
            j = tail[e]

            dx = coords[i, 0] - coords[j, 0]
            dy = coords[i, 1] - coords[j, 1]
            dist_sq = dx * dx + dy * dy
            if dist_sq > 0.0:
                coeff = (-2.0 * a * b * pow(dist_sq, b - 1.0)) / (a * pow(dist_sq, b) + 1.0)
                gx = clip(coeff * dx)
                gy = clip(coeff * dy)
                coords[i, 0] += alpha * gx
                coords[i, 1] += alpha * gy
                coords[j, 0] -= alpha * gx
                coords[j, 1] -= alpha * gy
            next_sample[e] += epochs_per_sample[e]

            n_neg = <int>((epoch - next_negative[e]) / eps_negative[e])
            for p in range(n_neg):
                k = <int>(splitmix64(&state) % <u64>n_points)
                dx = coords[i, 0] - coords[k, 0]
                dy = coords[i, 1] - coords[k, 1]
                dist_sq = dx * dx + dy * dy
                if dist_sq > 0.0:
                    coeff = (2.0 * gamma * b) / ((0.001 + dist_sq) * (a * pow(dist_sq, b) + 1.0))
                    coords[i, 0] += alpha * clip(coeff * dx)
                    coords[i, 1] += alpha * clip(coeff * dy)
                elif j == k:
                    continue
                else:
                    # coincident strangers get a fixed shove apart
                    coords[i, 0] += alpha * 4.0
                    coords[i, 1] += alpha * 4.0
            next_negative[e] += n_neg * eps_negative[e]

        alpha = initial_alpha * (1.0 - (<double>(epoch + 1) / <double>n_epochs))

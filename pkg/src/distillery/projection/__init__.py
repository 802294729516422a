"""2-D projection of the embedding matrix for the interactive scatter.

The hot inner loop (stochastic-gradient layout refinement) lives in a
compiled extension when available, with a bit-identical pure-Python fallback
selected at import time; set ``DISTILLERY_PURE_PYTHON=1`` to force the
fallback. ``benchmarks/bench_layout.py`` compares the two.
"""

from distillery.projection.layout import (
    KERNEL_BACKEND,
    ProjectionLayout,
    ProjectionParams,
    find_ab,
    project,
    project_array,
    trustworthiness,
)

__all__ = [
    "KERNEL_BACKEND",
    "ProjectionLayout",
    "ProjectionParams",
    "find_ab",
    "project",
    "project_array",
    "trustworthiness",
]

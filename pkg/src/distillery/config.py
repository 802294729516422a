"""Session configuration: one flat record serialized into the project file."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import Any


@dataclass
class SessionConfig:
    seed: int = 0
    embedding_dim: int = 768

    # citation-network client
    api_base_url: str = "https://api.semanticscholar.org/graph/v1"
    api_key_env: str = "DISTILL_API_KEY"
    fixtures_dir: str | None = None
    cache_dir: str | None = None
    cache_max_age_s: float = 7 * 24 * 3600.0
    rate_per_s: float = 1.0
    rate_burst: int = 10
    max_in_flight: int = 8

    # embedding provider: "hashing" | "remote" | "precomputed"
    provider: str = "hashing"
    provider_url: str | None = None
    provider_file: str | None = None

    # text cleaning and the English gate
    stopword_file: str | None = None
    substitutions_file: str | None = None
    non_ascii_ratio_max: float = 0.25
    min_stopword_hits: int = 2

    # vocabulary (derived from the core, then frozen)
    min_df: int = 1
    max_df_ratio: float = 1.0

    # SPPMI
    sppmi_window: int = 5
    sppmi_shift: int = 1

    # topic model
    k_min: int = 2
    k_max: int = 8
    nmf_alpha: float | None = None  # None selects the auto scale
    nmf_max_iter: int = 300
    nmf_tol: float = 1e-7
    n_perturbations: int = 10
    perturbation_noise: float = 0.03
    silhouette_floor: float = 0.75

    # 2-D projection
    n_neighbors: int = 15
    min_dist: float = 0.1
    n_epochs: int = 200

    def to_json(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "SessionConfig":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})

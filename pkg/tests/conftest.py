from __future__ import annotations

from pathlib import Path

import pytest

from distillery.config import SessionConfig
from distillery.records import PaperId, PaperRecord
from distillery.runtime import SessionRuntime

FIXTURES = Path(__file__).parent / "fixtures"
API_FIXTURES = FIXTURES / "api"

CORE_DOIS = [f"10.9999/p{n:02d}" for n in range(3)]
ON_TOPIC = {f"10.9999/p{n:02d}" for n in list(range(13)) + list(range(19, 25))}
OFF_TOPIC = {f"10.9999/p{n:02d}" for n in list(range(13, 19)) + list(range(25, 30))}


@pytest.fixture(scope="session")
def api_fixtures_dir() -> Path:
    assert API_FIXTURES.is_dir(), "run tests/fixtures/make_fixtures.py first"
    return API_FIXTURES


def make_fixture_config(**overrides) -> SessionConfig:
    base = dict(
        seed=7,
        embedding_dim=768,
        fixtures_dir=str(API_FIXTURES),
        k_min=2,
        k_max=6,
        n_epochs=60,
    )
    base.update(overrides)
    return SessionConfig(**base)


@pytest.fixture()
def fixture_runtime(api_fixtures_dir: Path) -> SessionRuntime:
    """Runtime over the offline corpus with the three core papers loaded."""
    runtime = SessionRuntime.create(make_fixture_config())
    runtime.add_core_by_ids([PaperId.doi(d) for d in CORE_DOIS])
    return runtime


def simple_record(value: str, *, hop: int = 0, core: bool | None = None,
                  title: str | None = None, abstract: str = "",
                  cites: list[str] | None = None,
                  refs: list[str] | None = None) -> PaperRecord:
    """Terse local-id record builder for store-level tests."""
    return PaperRecord(
        id=PaperId.local(value),
        title=title if title is not None else f"Paper {value}",
        abstract=abstract,
        year=2020,
        authors=["A. Author"],
        citation_ids=[PaperId.local(c) for c in (cites or [])],
        reference_ids=[PaperId.local(r) for r in (refs or [])],
        hop=hop,
        is_core=(hop == 0) if core is None else core,
    )

"""Records canned API responses from the real service over the offline
fixture corpus into frontend/fixtures/*.json.

The recorder also asserts the oracle facts the UI contract tests rely on
(e.g. the lasso polygon resolves to exactly the on-topic cluster), so a
drifting backend fails here, not silently in the frontend suite.

Run from the repository root: python3 frontend/scripts/record_fixtures.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

from fastapi.testclient import TestClient

REPO = Path(__file__).resolve().parents[2]
sys.path.insert(0, str(REPO / "tests"))

from distillery.config import SessionConfig
from distillery.records import PaperId
from distillery.runtime import SessionRuntime
from distillery.service import create_app

OUT = Path(__file__).resolve().parents[1] / "fixtures"
API_FIXTURES = REPO / "tests" / "fixtures" / "api"

CORE_DOIS = [f"10.9999/p{n:02d}" for n in range(3)]
ON_TOPIC = {f"doi:10.9999/p{n:02d}" for n in range(13)}
OFF_TOPIC = {f"doi:10.9999/p{n:02d}" for n in range(13, 19)}


def main() -> None:
    config = SessionConfig(seed=7, embedding_dim=128, n_epochs=150, n_neighbors=5,
                           k_min=2, k_max=5, fixtures_dir=str(API_FIXTURES))
    runtime = SessionRuntime.create(config)
    client = TestClient(create_app(runtime))
    recorded: dict[str, object] = {}

    def record(name: str, response) -> dict:
        assert response.status_code == 200, (name, response.text)
        payload = response.json()
        recorded[name] = payload
        return payload

    record("core", client.post("/api/core",
                               json={"ids": [f"doi:{d}" for d in CORE_DOIS]}))
    record("hop_preview", client.get("/api/hop/preview",
                                     params={"direction": "citations"}))
    record("hop", client.post("/api/hop", json={"direction": "citations"}))
    record("session", client.get("/api/session"))
    scatter = record("scatter_after_hop", client.get("/api/scatter"))
    record("compactness_after_hop", client.get("/api/metrics/compactness"))
    assert len(scatter) == 19

    # lasso polygon in layout coordinates around the on-topic cluster
    on_points = [p for p in scatter if p["id"] in ON_TOPIC]
    off_points = [p for p in scatter if p["id"] in OFF_TOPIC]
    assert len(on_points) == 13 and len(off_points) == 6
    xs = [p["x"] for p in on_points]
    ys = [p["y"] for p in on_points]
    pad_x = 0.05 * (max(xs) - min(xs)) + 1e-6
    pad_y = 0.05 * (max(ys) - min(ys)) + 1e-6
    lo_x, hi_x = min(xs) - pad_x, max(xs) + pad_x
    lo_y, hi_y = min(ys) - pad_y, max(ys) + pad_y
    # the two clusters must not overlap inside the lasso
    for p in off_points:
        assert not (lo_x <= p["x"] <= hi_x and lo_y <= p["y"] <= hi_y), (
            "off-topic point inside the on-topic lasso; widen the fixture gap")
    lasso = {"type": "lasso", "vertices": [
        [lo_x, lo_y], [hi_x, lo_y], [hi_x, hi_y], [lo_x, hi_y]]}
    recorded["lasso_geometry"] = lasso

    selection = record("selection_lasso",
                       client.post("/api/selection", json={"geometry": lasso}))
    assert set(selection["ids"]) == ON_TOPIC, (
        sorted(set(selection["ids"]) ^ ON_TOPIC))

    sel_id = selection["selection_id"]
    record("wordcloud", client.get(f"/api/selection/{sel_id}/wordcloud",
                                   params={"top": 25}))
    record("table", client.get(f"/api/selection/{sel_id}/table"))

    # delete the off-topic papers through a second (ids) selection, then undo
    off_selection = record("selection_off_topic", client.post(
        "/api/selection",
        json={"geometry": {"type": "ids", "ids": sorted(OFF_TOPIC)}}))
    record("prune_manual", client.post(
        "/api/prune/manual", json={"selection_id": off_selection["selection_id"]}))
    scatter_pruned = record("scatter_after_prune", client.get("/api/scatter"))
    assert len(scatter_pruned) == 13
    record("undo", client.post("/api/undo"))
    scatter_restored = record("scatter_after_undo", client.get("/api/scatter"))
    assert len(scatter_restored) == 19
    assert {p["id"] for p in scatter_restored} == {p["id"] for p in scatter}

    OUT.mkdir(parents=True, exist_ok=True)
    for name, payload in recorded.items():
        (OUT / f"{name}.json").write_text(json.dumps(payload, indent=2))
    print(f"recorded {len(recorded)} fixture payloads into {OUT}")


if __name__ == "__main__":
    main()

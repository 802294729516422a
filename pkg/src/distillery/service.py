"""HTTP API for the workbench UI.

All payloads are UTF-8 JSON. One session per process; GETs are repeatable
between mutations, every mutation endpoint appends exactly one journal
entry, and long-running steps can run as background jobs during which
further mutations are rejected with 409.
"""

from __future__ import annotations

import threading
import uuid
from typing import Any, Callable

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from distillery import errors as err
from distillery.cycle import run_cycle
from distillery.records import PaperId, PaperRecord
from distillery.runtime import SessionRuntime

_STATUS: list[tuple[type[Exception], int]] = [
    (err.UnknownPaperError, 404),
    (err.NotFoundError, 404),
    (err.StaleLayoutError, 409),
    (err.JobActiveError, 409),
    (err.CorePaperError, 409),
    (err.EmptyJournalError, 409),
    (err.DuplicatePaperError, 409),
    (err.RateLimitedError, 429),
    (err.FetchError, 502),
    (err.DistillError, 400),
]


def _status_for(exc: Exception) -> int:
    for klass, code in _STATUS:
        if isinstance(exc, klass):
            return code
    return 500


class JobManager:
    """At most one background job at a time; mutations wait for none."""

    def __init__(self):
        self._jobs: dict[str, dict[str, Any]] = {}
        self._lock = threading.Lock()

    def active(self) -> bool:
        with self._lock:
            return any(j["status"] == "running" for j in self._jobs.values())

    def guard_mutation(self) -> None:
        if self.active():
            raise err.JobActiveError("a background job is running; retry later")

    def submit(self, name: str, fn: Callable[[], Any]) -> str:
        with self._lock:
            if any(j["status"] == "running" for j in self._jobs.values()):
                raise err.JobActiveError("a background job is already running")
            job_id = uuid.uuid4().hex[:12]
            self._jobs[job_id] = {"id": job_id, "name": name, "status": "running",
                                  "result": None, "error": None}

        def run():
            try:
                result = fn()
                with self._lock:
                    self._jobs[job_id].update(status="done", result=result)
            except Exception as exc:  # surfaced through the status endpoint
                with self._lock:
                    self._jobs[job_id].update(status="error", error=str(exc))

        threading.Thread(target=run, name=f"job-{name}", daemon=True).start()
        return job_id

    def status(self, job_id: str) -> dict[str, Any]:
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None:
                raise err.UnknownPaperError(f"no job {job_id!r}")
            return dict(job)


class HopBody(BaseModel):
    direction: str = "citations"
    background: bool = False


class CoreBody(BaseModel):
    papers: list[dict[str, Any]] = Field(default_factory=list)
    ids: list[str] = Field(default_factory=list)


class SelectionBody(BaseModel):
    geometry: dict[str, Any]


class PruneManualBody(BaseModel):
    selection_id: str | None = None
    ids: list[str] | None = None
    skip_core: bool = False


class PruneTopicsBody(BaseModel):
    k_min: int | None = None
    k_max: int | None = None
    alpha: float | None = None
    background: bool = False


class CycleBody(BaseModel):
    plan: list[str] = Field(default_factory=lambda: ["hop", "hypersphere", "topics"])
    direction: str = "citations"
    cycle_id: str | None = None


def create_app(runtime: SessionRuntime) -> FastAPI:
    app = FastAPI(title="distillery", version="0.1.0")
    jobs = JobManager()
    app.state.runtime = runtime
    app.state.jobs = jobs

    @app.exception_handler(err.DistillError)
    async def _handle(request: Request, exc: err.DistillError) -> JSONResponse:
        return JSONResponse(status_code=_status_for(exc),
                            content={"error": type(exc).__name__, "detail": str(exc)})

    # --- session ---------------------------------------------------------------

    @app.get("/api/session")
    def session_summary() -> dict[str, Any]:
        with runtime.lock:
            session = runtime.session
            hops = [r.hop for r in session.records()]
            return {
                "n_papers": len(session),
                "n_core": len(session.core_ids()),
                "current_hop": session.current_hop(),
                "hops": sorted(set(hops)),
                "journal_length": len(session.journal),
                "corpus_version": runtime.corpus_version,
                "config": session.config.to_json(),
            }

    @app.post("/api/core")
    def add_core(body: CoreBody) -> dict[str, Any]:
        jobs.guard_mutation()
        if body.papers:
            records = [PaperRecord.from_json({**p, "hop": 0, "is_core": True})
                       for p in body.papers]
            runtime.add_core(records)
        elif body.ids:
            runtime.add_core_by_ids([PaperId.from_str(s) for s in body.ids])
        else:
            raise err.EmptyCoreError("provide core papers or core ids")
        return {"n_papers": len(runtime.session)}

    # --- expansion ---------------------------------------------------------------

    @app.post("/api/hop")
    def do_hop(body: HopBody) -> dict[str, Any]:
        jobs.guard_mutation()
        if body.background:
            job_id = jobs.submit("hop", lambda: _hop_sync(body.direction))
            return {"job_id": job_id}
        return _hop_sync(body.direction)

    def _hop_sync(direction: str) -> dict[str, Any]:
        result = runtime.hop(direction)
        return {
            "direction": result.direction,
            "hop": result.requested_at_hop,
            "new_papers": len(result.new_ids),
            "failures": {str(k): str(v) for k, v in result.failures.items()},
            "n_papers": len(runtime.session),
        }

    @app.get("/api/hop/preview")
    def hop_preview(direction: str = Query("citations")) -> dict[str, Any]:
        return {"direction": direction, "count": runtime.hop_preview(direction)}

    # --- scatter and selections -----------------------------------------------------

    @app.get("/api/scatter")
    def scatter() -> list[dict[str, Any]]:
        return runtime.scatter()

    @app.post("/api/selection")
    def make_selection(body: SelectionBody) -> dict[str, Any]:
        selection = runtime.make_selection(body.geometry)
        return {"selection_id": selection.selection_id,
                "ids": [str(pid) for pid in selection.resolved_ids]}

    @app.get("/api/selection/{selection_id}/wordcloud")
    def selection_wordcloud(selection_id: str, top: int = Query(50, ge=1)) -> dict[str, Any]:
        counts = runtime.selection_wordcloud(selection_id, top_n=top)
        return {"counts": [[token, count] for token, count in counts]}

    @app.get("/api/selection/{selection_id}/table")
    def selection_table(selection_id: str) -> dict[str, Any]:
        return {"rows": runtime.selection_table(selection_id)}

    # --- pruning ------------------------------------------------------------------

    @app.post("/api/prune/manual")
    def prune_manual(body: PruneManualBody) -> dict[str, Any]:
        jobs.guard_mutation()
        ids = [PaperId.from_str(s) for s in body.ids] if body.ids else None
        result = runtime.prune_manual(ids=ids, selection_id=body.selection_id,
                                      skip_core=body.skip_core)
        return {**result, "n_papers": len(runtime.session)}

    @app.post("/api/prune/hypersphere")
    def prune_hypersphere() -> dict[str, Any]:
        jobs.guard_mutation()
        result = runtime.prune_hypersphere()
        return {**result, "n_papers": len(runtime.session)}

    @app.post("/api/prune/topics")
    def prune_topics(body: PruneTopicsBody) -> dict[str, Any]:
        jobs.guard_mutation()
        k_range = None
        if body.k_min is not None and body.k_max is not None:
            k_range = list(range(body.k_min, body.k_max + 1))

        def work() -> dict[str, Any]:
            result = runtime.prune_topics(k_range=k_range, alpha=body.alpha)
            return {**result, "n_papers": len(runtime.session)}

        if body.background:
            return {"job_id": jobs.submit("prune-topics", work)}
        return work()

    # --- metrics, undo, export, jobs --------------------------------------------------

    @app.get("/api/metrics/compactness")
    def metrics_compactness() -> dict[str, Any]:
        report = runtime.compactness()
        return {"score": report.score, "n_documents": report.n_documents}

    @app.post("/api/undo")
    def undo() -> dict[str, Any]:
        jobs.guard_mutation()
        runtime.undo()
        return {"n_papers": len(runtime.session),
                "journal_length": len(runtime.session.journal)}

    @app.post("/api/cycle")
    def cycle(body: CycleBody) -> dict[str, Any]:
        jobs.guard_mutation()
        report = run_cycle(runtime, body.plan, direction=body.direction,
                           cycle_id=body.cycle_id)
        return {
            "cycle_id": report.cycle_id,
            "steps": report.steps,
            "executed": report.executed,
            "compactness_trace": report.compactness_trace,
            "corpus_sizes": report.corpus_sizes,
        }

    @app.get("/api/export")
    def export() -> dict[str, Any]:
        with runtime.lock:
            return {
                "papers": [r.to_json() for r in runtime.session.records()],
                "jsonl": runtime.export_corpus_jsonl(),
                "config": runtime.session.config.to_json(),
            }

    @app.get("/api/jobs/{job_id}")
    def job_status(job_id: str) -> dict[str, Any]:
        return jobs.status(job_id)

    return app

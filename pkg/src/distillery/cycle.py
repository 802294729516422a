"""One full distillation cycle: hop, then the configured prune steps in order.

Each completed step is journaled with a (cycle_id, step index) tag and
snapshotted, so a cycle killed mid-way can be resumed with the same id and
will skip the steps that already ran; the final corpus matches an
uninterrupted run.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field
from typing import Any, Sequence

from distillery.errors import EmptyCoreError, InvalidRecordError
from distillery.runtime import SessionRuntime

CYCLE_STEPS = ("hop", "hypersphere", "topics")


@dataclass
class CycleReport:
    cycle_id: str
    steps: list[str]
    executed: list[bool]
    compactness_trace: list[float]
    corpus_sizes: list[int]
    step_results: list[dict[str, Any]] = field(default_factory=list)


def _completed_steps(runtime: SessionRuntime, cycle_id: str) -> set[int]:
    done = set()
    for entry in runtime.session.journal:
        if entry.parameters.get("cycle_id") == cycle_id:
            done.add(int(entry.parameters.get("cycle_step", -1)))
    return done


def run_cycle(runtime: SessionRuntime, plan: Sequence[str],
              direction: str = "citations",
              cycle_id: str | None = None) -> CycleReport:
    """Execute the plan, reporting compactness before and after every step."""
    for step in plan:
        if step not in CYCLE_STEPS:
            raise InvalidRecordError(f"unknown cycle step {step!r}; "
                                     f"valid steps: {CYCLE_STEPS}")
    if len(runtime.session) == 0:
        raise EmptyCoreError("establish a core before running a cycle")
    cycle_id = cycle_id or uuid.uuid4().hex[:12]
    done = _completed_steps(runtime, cycle_id)

    report = CycleReport(
        cycle_id=cycle_id,
        steps=list(plan),
        executed=[],
        compactness_trace=[runtime.compactness().score],
        corpus_sizes=[len(runtime.session)],
    )
    for index, step in enumerate(plan):
        if index in done:
            report.executed.append(False)
            report.step_results.append({"skipped": True})
        else:
            tag = {"cycle_id": cycle_id, "cycle_step": index}
            if step == "hop":
                result = runtime.hop(direction, extra_params=tag)
                outcome: dict[str, Any] = {
                    "new_papers": len(result.new_ids),
                    "failures": len(result.failures),
                }
            elif step == "hypersphere":
                outcome = runtime.prune_hypersphere(extra_params=tag)
            else:
                outcome = runtime.prune_topics(extra_params=tag)
            runtime.session.take_snapshot(label=f"cycle:{cycle_id}:{index}:{step}")
            report.executed.append(True)
            report.step_results.append(outcome)
        report.compactness_trace.append(runtime.compactness().score)
        report.corpus_sizes.append(len(runtime.session))
    return report

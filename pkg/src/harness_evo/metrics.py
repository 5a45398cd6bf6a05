"""Evaluation metrics over run histories, and held-out test reports.

Three measurements, all exact rationals until they hit a report surface:

- convergence speed: first iteration whose running best scalar meets a
  threshold, or NOT_REACHED;
- final performance: fraction of runs whose best score passed;
- robustness: population variance of convergence speed over the tasks that
  reached the threshold, with the non-reaching tasks counted alongside
  (variance is UNDEFINED when nothing reached it).

meta_test_report runs a blueprint against held-out tasks and emits one
canonical document with metrics, per-task convergence records, and
provenance. Training/test contamination is refused, judged by the training
task ids recorded in the blueprint document's provenance.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Mapping, Sequence

from .canon import (
    canonical_json,
    derive_seed,
    fixed6,
    fraction_to_text,
    scalar_to_fraction,
)
from .errors import EmptyAggregate, EngineError, TrainTestOverlap
from .inner_loop import InnerRunResult, blueprint_digest, run_inner_loop
from .model import (
    Blueprint,
    HistoryEntry,
    LoopConfig,
    Score,
    Task,
    scalarize,
)

NOT_REACHED = "NOT_REACHED"
UNDEFINED = "UNDEFINED"

Speed = int | str  # iteration count, or the NOT_REACHED sentinel


def convergence_speed(
    history: Sequence[HistoryEntry], threshold: Fraction, budget_ms: int
) -> Speed:
    """Smallest k whose running best scalar reaches the threshold, 1-based."""
    if not Fraction(0) <= threshold <= Fraction(1):
        raise ValueError("threshold must lie in [0, 1]")
    best = Fraction(0)
    for k, entry in enumerate(history, start=1):
        best = max(best, scalarize(entry.score, budget_ms))
        if best >= threshold:
            return k
    return NOT_REACHED


def final_performance(results: Sequence[InnerRunResult]) -> Fraction:
    """Fraction of runs whose best score passed all criteria."""
    if not results:
        raise EmptyAggregate("no runs to aggregate")
    passed = sum(
        1 for r in results if isinstance(r.best_score, Score) and r.best_score.passed
    )
    return Fraction(passed, len(results))


def robustness(speeds: Sequence[Speed]) -> tuple[Fraction | str, int]:
    """(population variance over reached speeds, count of NOT_REACHED)."""
    reached = [s for s in speeds if s != NOT_REACHED]
    missing = len(speeds) - len(reached)
    if not reached:
        return UNDEFINED, missing
    mean = Fraction(sum(reached), len(reached))
    variance = sum((Fraction(s) - mean) ** 2 for s in reached) / len(reached)
    return variance, missing


@dataclass(frozen=True)
class ConvergenceRecord:
    task_id: str
    iterations_to_threshold: Speed
    final_pass: bool
    best_scalar_by_iteration: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        series = self.best_scalar_by_iteration
        if any(a > b for a, b in zip(series, series[1:])):
            raise ValueError("best_scalar_by_iteration must be nondecreasing")
        k = self.iterations_to_threshold
        if k != NOT_REACHED and not (isinstance(k, int) and 1 <= k <= len(series)):
            raise ValueError(f"iterations_to_threshold out of range: {k!r}")

    def to_doc(self) -> dict[str, Any]:
        return {
            "best_scalar_by_iteration": [fixed6(s) for s in self.best_scalar_by_iteration],
            "final_pass": self.final_pass,
            "iterations_to_threshold": self.iterations_to_threshold,
            "task_id": self.task_id,
        }

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "ConvergenceRecord":
        return cls(
            task_id=doc["task_id"],
            iterations_to_threshold=doc["iterations_to_threshold"],
            final_pass=doc["final_pass"],
            best_scalar_by_iteration=tuple(
                scalar_to_fraction(s) for s in doc["best_scalar_by_iteration"]
            ),
        )


def build_convergence_record(
    task_id: str,
    history: Sequence[HistoryEntry],
    threshold: Fraction,
    budget_ms: int,
) -> ConvergenceRecord:
    series: list[Fraction] = []
    best = Fraction(0)
    final_pass = False
    for entry in history:
        best = max(best, scalarize(entry.score, budget_ms))
        series.append(best)
        if isinstance(entry.score, Score) and entry.score.passed:
            final_pass = True
    return ConvergenceRecord(
        task_id=task_id,
        iterations_to_threshold=convergence_speed(history, threshold, budget_ms),
        final_pass=final_pass,
        best_scalar_by_iteration=tuple(series),
    )


def render_series(record: ConvergenceRecord) -> str:
    """Two-column plot data: iteration number and running best scalar."""
    lines = [
        f"{k} {fixed6(scalar)}"
        for k, scalar in enumerate(record.best_scalar_by_iteration, start=1)
    ]
    return "".join(line + "\n" for line in lines)


# ---------------------------------------------------------------------------
# Held-out evaluation


def blueprint_provenance(blueprint_doc: Mapping[str, Any] | Blueprint) -> tuple[Blueprint, list[str]]:
    """Split a blueprint document into the blueprint and its training ids.

    Accepts either a bare Blueprint (no provenance, e.g. a hand-written
    starting point) or the document form {"blueprint": ..., "provenance":
    {"training_task_ids": [...], ...}} that the meta runner emits.
    """
    if isinstance(blueprint_doc, Blueprint):
        return blueprint_doc, []
    if "blueprint" in blueprint_doc:
        provenance = blueprint_doc.get("provenance", {})
        return (
            Blueprint.from_doc(blueprint_doc["blueprint"]),
            list(provenance.get("training_task_ids", [])),
        )
    return Blueprint.from_doc(blueprint_doc), []


def meta_test_report(
    blueprint: Mapping[str, Any] | Blueprint,
    test_tasks: Sequence[Task],
    K: int,
    seed: int,
    threshold: Fraction,
    parallelism: int | None = None,
) -> dict[str, Any]:
    """Run the blueprint on held-out tasks and report the three metrics.

    The report is a pure function of (blueprint, tasks, K, seed, threshold):
    regenerating it yields identical bytes under canonical encoding.
    """
    bp, training_ids = blueprint_provenance(blueprint)
    if not test_tasks:
        raise EmptyAggregate("no test tasks to evaluate")
    ids = [t.id for t in test_tasks]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate task ids in test set")
    overlap = sorted(set(ids) & set(training_ids))
    if overlap:
        raise TrainTestOverlap(f"test tasks seen during training: {', '.join(overlap)}")

    run_bp = Blueprint(
        worker_binding=bp.worker_binding,
        initial_harness=bp.initial_harness,
        evaluator_config=bp.evaluator_config,
        evolution_strategy=bp.evolution_strategy,
        loop=LoopConfig(K=K, parallelism=bp.loop.parallelism, early_stop=bp.loop.early_stop),
    )
    budget = run_bp.time_budget_ms()

    def run_one(i: int, task: Task) -> InnerRunResult:
        try:
            return run_inner_loop(task, run_bp, derive_seed(seed, i))
        except EngineError as exc:
            raise type(exc)(f"task {task.id}: {exc}") from exc

    if parallelism is None or parallelism <= 1:
        results = [run_one(i, t) for i, t in enumerate(test_tasks)]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            futures = [pool.submit(run_one, i, t) for i, t in enumerate(test_tasks)]
            results = [f.result() for f in futures]

    records = [
        build_convergence_record(task.id, result.history, threshold, budget)
        for task, result in zip(test_tasks, results)
    ]
    speeds = [r.iterations_to_threshold for r in records]
    variance, missing = robustness(speeds)
    return {
        "metrics": {
            "convergence_speed": {r.task_id: r.iterations_to_threshold for r in records},
            "final_performance": fraction_to_text(final_performance(results)),
            "robustness": {
                "kind": "population_variance",
                "not_reached_count": missing,
                "variance": variance if variance == UNDEFINED else fraction_to_text(variance),
            },
        },
        "per_task": [r.to_doc() for r in records],
        "provenance": {
            "K": K,
            "blueprint_digest": blueprint_digest(bp),
            "seed": seed,
            "test_task_ids": ids,
            "threshold": fraction_to_text(threshold),
            "training_task_ids": sorted(training_ids),
        },
    }


def render_report(report: Mapping[str, Any]) -> str:
    return canonical_json(report) + "\n"

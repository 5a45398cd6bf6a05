"""Meta-evolution loop.

Each round runs the full harness evolution loop on every training task under
the current blueprint, aggregates the per-task best scores into one rational
meta score, records a strict-improvement verdict, and asks the meta-evolution
agent for the next blueprint starting from the best one so far. The meta
score of a blueprint is the arithmetic mean of scalarized per-task best
scores, computed exactly and then quantized to six decimal places so the
value in memory is the value in the log.

Within a round, per-task inner runs may execute concurrently; inner seeds
derive from (seed, round, task index), so the schedule cannot perturb any
result, and results are always joined in task order before aggregation.
"""

from __future__ import annotations

import io
from concurrent.futures import ThreadPoolExecutor
from contextlib import ExitStack
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence, TextIO

from .canon import canonical_json, derive_seed, digest_text_hex, quantize6
from .errors import BlueprintInvalid, EmptyAggregate, EngineError
from .inner_loop import _LogEmitter, blueprint_digest, run_inner_loop
from .model import (
    IMPROVED,
    REGRESSED,
    Blueprint,
    MetaHistoryEntry,
    Task,
    TaskResult,
    scalarize,
    validate_blueprint,
)
from .protocol import AgentBinding, ExternalAgentSession, call_meta_evolution
from .simkit import MetaSpace


@dataclass(frozen=True)
class MetaRunResult:
    best_blueprint: Blueprint
    best_meta_score: Fraction
    meta_history: tuple[MetaHistoryEntry, ...]
    stopped_early: bool


def aggregate(task_results: Sequence[TaskResult]) -> Fraction:
    """Mean of the per-task scalars: exact arithmetic, then 1e-6 quantization."""
    if not task_results:
        raise EmptyAggregate("no task results to aggregate")
    total = sum((r.scalar for r in task_results), Fraction(0))
    return quantize6(total / len(task_results))


def meta_log_header(tasks: Sequence[Task], blueprint0: Blueprint, seed: int, rounds: int) -> str:
    return canonical_json(
        {
            "J": rounds,
            "blueprint_digest": blueprint_digest(blueprint0),
            "seed": seed,
            "task_ids": [t.id for t in tasks],
        }
    )


def inner_log_name(round_index: int, task_id: str) -> str:
    return f"round_{round_index:03d}/{task_id}.log"


def run_meta_loop(
    tasks: Sequence[Task],
    meta_binding: AgentBinding,
    blueprint0: Blueprint,
    rounds: int,
    seed: int,
    meta_space: MetaSpace | None = None,
    out_dir: str | Path | None = None,
    parallelism: int | None = None,
    log: TextIO | None = None,
    expected_lines: Sequence[str] = (),
) -> MetaRunResult:
    """Run the meta loop for `rounds` rounds (or until the meta space runs out).

    Inner logs are written under `out_dir` named by (round, task id) when an
    output directory is given; their digests land in the meta history either
    way. A `parallelism` argument overrides the per-blueprint setting.
    """
    if not tasks:
        raise EmptyAggregate("meta loop needs at least one training task")
    ids = [t.id for t in tasks]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate task ids in training set")
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    problems = validate_blueprint(blueprint0)
    if problems:
        raise BlueprintInvalid("; ".join(str(v) for v in problems))

    emitter = _LogEmitter(log, expected_lines)
    emitter.emit(meta_log_header(tasks, blueprint0, seed, rounds))

    meta_history: list[MetaHistoryEntry] = []
    best_blueprint = blueprint0
    best_meta_score: Fraction | None = None  # None stands in for -infinity
    blueprint = blueprint0
    stopped_early = False

    with ExitStack() as stack:
        meta_session: ExternalAgentSession | None = None
        if meta_binding.kind == "external":
            meta_session = stack.enter_context(ExternalAgentSession(meta_binding))

        for j in range(rounds):
            results = _run_round(tasks, blueprint, j, seed, out_dir, parallelism)
            meta_score = aggregate(results)
            if best_meta_score is None or meta_score > best_meta_score:
                verdict = IMPROVED
                best_blueprint = blueprint
                best_meta_score = meta_score
            else:
                verdict = REGRESSED
            entry = MetaHistoryEntry(j, blueprint, tuple(results), meta_score, verdict)
            meta_history.append(entry)
            emitter.emit(canonical_json(entry.to_doc()))

            if j == rounds - 1:
                break
            proposal = call_meta_evolution(
                meta_binding,
                best_blueprint,
                meta_history,
                derive_seed(seed, j),
                meta_space=meta_space,
                session=meta_session,
            )
            if proposal is None:
                stopped_early = True
                break
            blueprint = proposal

    emitter.finish()
    assert best_meta_score is not None  # rounds >= 1 guarantees one entry
    return MetaRunResult(best_blueprint, best_meta_score, tuple(meta_history), stopped_early)


def _run_round(
    tasks: Sequence[Task],
    blueprint: Blueprint,
    round_index: int,
    seed: int,
    out_dir: str | Path | None,
    parallelism: int | None,
) -> list[TaskResult]:
    budget = blueprint.time_budget_ms()

    def run_one(task_index: int, task: Task) -> TaskResult:
        inner_seed = derive_seed(seed, round_index, task_index)
        buf = io.StringIO()
        try:
            result = run_inner_loop(task, blueprint, inner_seed, log=buf)
        except EngineError as exc:
            raise type(exc)(f"round {round_index} task {task.id}: {exc}") from exc
        text = buf.getvalue()
        rel_path = inner_log_name(round_index, task.id)
        if out_dir is not None:
            target = Path(out_dir) / rel_path
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(text, encoding="utf-8")
        return TaskResult(
            task_id=task.id,
            best_score=result.best_score,
            scalar=scalarize(result.best_score, budget),
            history_digest=digest_text_hex(text),
            history_path=rel_path,
        )

    effective = parallelism if parallelism is not None else blueprint.loop.parallelism
    if effective <= 1:
        return [run_one(i, t) for i, t in enumerate(tasks)]
    with ThreadPoolExecutor(max_workers=effective) as pool:
        futures = [pool.submit(run_one, i, t) for i, t in enumerate(tasks)]
        return [f.result() for f in futures]


def run_meta_loop_logged(
    tasks: Sequence[Task],
    meta_binding: AgentBinding,
    blueprint0: Blueprint,
    rounds: int,
    seed: int,
    path: str | Path,
    meta_space: MetaSpace | None = None,
    out_dir: str | Path | None = None,
    parallelism: int | None = None,
) -> tuple[MetaRunResult, str]:
    """Run and write the meta log to `path`, returning (result, log text)."""
    buf = io.StringIO()
    result = run_meta_loop(
        tasks,
        meta_binding,
        blueprint0,
        rounds,
        seed,
        meta_space=meta_space,
        out_dir=out_dir,
        parallelism=parallelism,
        log=buf,
    )
    text = buf.getvalue()
    Path(path).write_text(text, encoding="utf-8")
    return result, text


def resume_meta_loop(
    log_path: str | Path,
    tasks: Sequence[Task],
    meta_binding: AgentBinding,
    blueprint0: Blueprint,
    rounds: int,
    seed: int,
    meta_space: MetaSpace | None = None,
    out_dir: str | Path | None = None,
    parallelism: int | None = None,
) -> MetaRunResult:
    """Replay-validated continuation of an interrupted meta run.

    Completed rounds are recomputed deterministically and byte-compared
    against the logged prefix; inner logs are rewritten identically along the
    way, so the resumed run directory matches an uninterrupted one.
    """
    from .inner_loop import complete_log_lines

    path = Path(log_path)
    text = path.read_text(encoding="utf-8") if path.exists() else ""
    lines = complete_log_lines(text)
    kept = sum(len(line.encode("utf-8")) + 1 for line in lines)
    if path.exists() and kept != len(text.encode("utf-8")):
        with path.open("rb+") as fh:
            fh.truncate(kept)
    with path.open("a", encoding="utf-8") as fh:
        return run_meta_loop(
            tasks,
            meta_binding,
            blueprint0,
            rounds,
            seed,
            meta_space=meta_space,
            out_dir=out_dir,
            parallelism=parallelism,
            log=fh,
            expected_lines=lines,
        )

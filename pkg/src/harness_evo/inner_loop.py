"""Harness evolution loop.

One run takes a task, a blueprint, and a seed, then repeats K times: rebuild
the worker from the current harness, execute against a freshly reset
environment, evaluate, record a strict-improvement verdict, and ask the
evolution strategy for the next harness starting from the best one seen so
far. Ties lose: a score equal to the best is REGRESSED.

Each run appends to a log, one canonical history entry per line after a
header line. Resume works by deterministic replay: the run is recomputed
from scratch and every produced line is byte-compared against the logged
prefix, so a tampered or foreign log surfaces as ResumeMismatch instead of
silently forking the trajectory.
"""

from __future__ import annotations

import io
from contextlib import ExitStack
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, TextIO

from .canon import ENGINE_VERSION, canonical_json, derive_seed, digest_text_hex
from .errors import BlueprintInvalid, EngineError, ResumeMismatch
from .model import (
    IMPROVED,
    MIN_SCORE,
    REGRESSED,
    Blueprint,
    Harness,
    HistoryEntry,
    ScoreLike,
    Task,
    compare_scores,
    scalarize,
    score_from_doc,
    score_to_doc,
    validate_blueprint,
)
from .protocol import (
    AgentBinding,
    ExternalAgentSession,
    call_evaluator,
    call_evolution,
    call_worker,
)


@dataclass(frozen=True)
class InnerRunResult:
    best_harness: Harness
    best_score: ScoreLike
    history: tuple[HistoryEntry, ...]
    stopped_early: bool

    def to_doc(self) -> dict:
        return {
            "best_harness": self.best_harness.to_doc(),
            "best_score": score_to_doc(self.best_score),
            "history": [entry.to_doc() for entry in self.history],
            "stopped_early": self.stopped_early,
        }

    @classmethod
    def from_doc(cls, doc) -> "InnerRunResult":
        return cls(
            best_harness=Harness.from_doc(doc["best_harness"]),
            best_score=score_from_doc(doc["best_score"]),
            history=tuple(HistoryEntry.from_doc(e) for e in doc["history"]),
            stopped_early=doc["stopped_early"],
        )


def select_best(history: Sequence[HistoryEntry]) -> tuple[Harness | None, ScoreLike]:
    """Earliest entry attaining the maximum score; (None, MIN_SCORE) when empty."""
    best_harness: Harness | None = None
    best_score: ScoreLike = MIN_SCORE
    for entry in history:
        if compare_scores(entry.score, best_score) > 0:
            best_score = entry.score
            best_harness = entry.harness
    return best_harness, best_score


# ---------------------------------------------------------------------------
# Run logs


def blueprint_digest(blueprint: Blueprint) -> str:
    return digest_text_hex(blueprint.canonical())


def run_log_header(task: Task, blueprint: Blueprint, seed: int) -> str:
    return canonical_json(
        {
            "blueprint_digest": blueprint_digest(blueprint),
            "engine_version": ENGINE_VERSION,
            "seed": seed,
            "task_id": task.id,
        }
    )


def complete_log_lines(text: str) -> list[str]:
    """Split a log into complete lines, discarding an interrupted final write.

    A line is complete only when newline-terminated; a trailing chunk without
    one is treated as a torn write and dropped rather than parsed.
    """
    parts = text.split("\n")
    return parts[:-1]


class _LogEmitter:
    """Writes run log lines, byte-checking them against a resumed prefix.

    Lines covered by the expected prefix are verified, not rewritten; lines
    beyond it go to the sink. Any divergence from the prefix, including a
    prefix longer than the replayed run, is a ResumeMismatch.
    """

    def __init__(self, sink: TextIO | None, expected: Sequence[str] = ()) -> None:
        self.sink = sink
        self.expected = list(expected)
        self.produced = 0

    def emit(self, line: str) -> None:
        i = self.produced
        self.produced += 1
        if i < len(self.expected):
            if line != self.expected[i]:
                raise ResumeMismatch(
                    f"log line {i + 1} diverges from replay: "
                    f"logged {self.expected[i]!r}, replayed {line!r}"
                )
            return
        if self.sink is not None:
            self.sink.write(line + "\n")
            self.sink.flush()

    def finish(self) -> None:
        if self.produced < len(self.expected):
            raise ResumeMismatch(
                f"log holds {len(self.expected)} lines but the replayed run "
                f"produced only {self.produced}"
            )


# ---------------------------------------------------------------------------
# The loop


def run_inner_loop(
    task: Task,
    blueprint: Blueprint,
    seed: int,
    log: TextIO | None = None,
    expected_lines: Sequence[str] = (),
    evaluator_binding: AgentBinding | None = None,
) -> InnerRunResult:
    """Run K iterations of execute / evaluate / verdict / evolve-from-best.

    The evolution call is seeded from (seed, k) each iteration and is skipped
    on the last one since its output would never run. A strategy reporting
    space exhaustion, or the best scalar crossing the early-stop threshold,
    terminates the loop cleanly with stopped_early set.
    """
    problems = validate_blueprint(blueprint)
    if problems:
        raise BlueprintInvalid("; ".join(str(v) for v in problems))

    K = blueprint.loop.K
    threshold = blueprint.early_stop_threshold()
    strategy = blueprint.evolution_strategy
    worker_binding = AgentBinding.for_worker(blueprint.worker_binding)
    eval_binding = evaluator_binding if evaluator_binding is not None else AgentBinding.for_evaluator()
    for_builtin = blueprint.worker_binding.kind == "builtin"

    emitter = _LogEmitter(log, expected_lines)
    emitter.emit(run_log_header(task, blueprint, seed))

    history: list[HistoryEntry] = []
    best_harness = blueprint.initial_harness
    best_score: ScoreLike = MIN_SCORE
    harness = blueprint.initial_harness
    stopped_early = False

    with ExitStack() as stack:
        worker_session = _open_session(stack, worker_binding)
        eval_session = _open_session(stack, eval_binding)
        evolve_session = _open_session(stack, AgentBinding.for_evolution(strategy))

        for k in range(1, K + 1):
            try:
                trace = call_worker(worker_binding, harness, task, session=worker_session)
                report, score = call_evaluator(
                    eval_binding, trace, task, blueprint.evaluator_config, session=eval_session
                )
            except EngineError as exc:
                raise type(exc)(f"iteration {k}: {exc}") from exc

            if compare_scores(score, best_score) > 0:
                verdict = IMPROVED
                best_score = score
                best_harness = harness
            else:
                verdict = REGRESSED
            entry = HistoryEntry(k, harness, report, score, verdict)
            history.append(entry)
            emitter.emit(canonical_json(entry.to_doc()))

            if threshold is not None and scalarize(best_score, blueprint.time_budget_ms()) >= threshold:
                stopped_early = True
                break
            if k == K:
                break
            try:
                proposal = call_evolution(
                    strategy,
                    best_harness,
                    history,
                    derive_seed(seed, k),
                    task,
                    session=evolve_session,
                    for_builtin_worker=for_builtin,
                )
            except EngineError as exc:
                raise type(exc)(f"iteration {k}: {exc}") from exc
            if proposal is None:
                stopped_early = True
                break
            harness = proposal

    emitter.finish()
    return InnerRunResult(best_harness, best_score, tuple(history), stopped_early)


def _open_session(stack: ExitStack, binding: AgentBinding) -> ExternalAgentSession | None:
    if binding.kind != "external":
        return None
    return stack.enter_context(ExternalAgentSession(binding))


def run_inner_loop_logged(
    task: Task,
    blueprint: Blueprint,
    seed: int,
    path: str | Path,
    evaluator_binding: AgentBinding | None = None,
) -> tuple[InnerRunResult, str]:
    """Run and write the log to `path`, returning (result, full log text)."""
    buf = io.StringIO()
    result = run_inner_loop(task, blueprint, seed, log=buf, evaluator_binding=evaluator_binding)
    text = buf.getvalue()
    Path(path).write_text(text, encoding="utf-8")
    return result, text


def resume_inner_loop(
    log_path: str | Path,
    blueprint: Blueprint,
    task: Task,
    seed: int,
    evaluator_binding: AgentBinding | None = None,
) -> InnerRunResult:
    """Continue an interrupted run, leaving the log byte-identical to one
    uninterrupted run with the same seed.

    The logged prefix is validated by replay; a torn final line is truncated
    away first, then fresh lines are appended past the verified prefix.
    """
    path = Path(log_path)
    text = path.read_text(encoding="utf-8") if path.exists() else ""
    lines = complete_log_lines(text)
    kept = sum(len(line.encode("utf-8")) + 1 for line in lines)
    if path.exists() and kept != len(text.encode("utf-8")):
        with path.open("rb+") as fh:
            fh.truncate(kept)
    with path.open("a", encoding="utf-8") as fh:
        return run_inner_loop(
            task,
            blueprint,
            seed,
            log=fh,
            expected_lines=lines,
            evaluator_binding=evaluator_binding,
        )

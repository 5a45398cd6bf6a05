"""Shared domain types, the score ordering, scalarization, and validation.

All types are immutable values. Two harnesses (or blueprints) are equal iff
their canonical serializations are byte-equal; ``to_doc``/``from_doc`` round
trip through that encoding exactly.

Scores are ordered lexicographically: pass/fail first, then fraction of
criteria met, then total execution time as the tiebreaker. ``MIN_SCORE`` is a
distinct sentinel strictly below every constructible score, so a loop's
"nothing evaluated yet" state can never be confused with a real evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping

from .canon import (
    canonical_json,
    fixed6,
    fraction_from_text,
    fraction_to_text,
    scalar_to_fraction,
)

IMPROVED = "IMPROVED"
REGRESSED = "REGRESSED"

# Schema ranges for the structured harness sections. Extension sections are
# free-form and not ranged.
PLANNER_DEPTH_RANGE = (1, 3)
MAX_STEPS_RANGE = (1, 1_000_000)
MODEL_TIERS = ("fast", "smart")
PROMPT_STYLES = ("terse", "verbose")

EVOLUTION_KINDS = ("random", "hill_climb", "exhaustive", "external")

Scalar = int | float | str | bool


@dataclass(frozen=True)
class Violation:
    """One schema violation, addressed by the path of the offending field."""

    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


# ---------------------------------------------------------------------------
# Tasks


@dataclass(frozen=True)
class Criterion:
    id: str
    kind: str  # equals_target | step_budget | custom
    params: Mapping[str, Any] = field(default_factory=dict)

    def to_doc(self) -> dict[str, Any]:
        return {"id": self.id, "kind": self.kind, "params": dict(self.params)}

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "Criterion":
        return cls(id=doc["id"], kind=doc["kind"], params=dict(doc.get("params", {})))


@dataclass(frozen=True)
class EnvironmentSpec:
    """Start state, alphabet, and hard step budget of the target environment."""

    start: str
    alphabet: str
    max_steps: int

    def to_doc(self) -> dict[str, Any]:
        return {"alphabet": self.alphabet, "max_steps": self.max_steps, "start": self.start}

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "EnvironmentSpec":
        return cls(start=doc["start"], alphabet=doc["alphabet"], max_steps=doc["max_steps"])


@dataclass(frozen=True)
class Task:
    id: str
    instructions: str
    criteria: tuple[Criterion, ...]
    environment: EnvironmentSpec

    def __post_init__(self) -> None:
        if not self.criteria:
            raise ValueError(f"task {self.id}: criteria must be nonempty")
        ids = [c.id for c in self.criteria]
        if len(set(ids)) != len(ids):
            raise ValueError(f"task {self.id}: duplicate criterion ids {ids}")

    def to_doc(self) -> dict[str, Any]:
        return {
            "criteria": [c.to_doc() for c in self.criteria],
            "environment": self.environment.to_doc(),
            "id": self.id,
            "instructions": self.instructions,
        }

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "Task":
        return cls(
            id=doc["id"],
            instructions=doc["instructions"],
            criteria=tuple(Criterion.from_doc(c) for c in doc["criteria"]),
            environment=EnvironmentSpec.from_doc(doc["environment"]),
        )


# ---------------------------------------------------------------------------
# Harness


@dataclass(frozen=True)
class Harness:
    """Everything that parameterizes a worker except model weights.

    Four structured sections plus free-form extension sections for external
    workers. Equality and hashing go through the canonical serialization.
    """

    prompts: Mapping[str, str]
    tools: tuple[str, ...]
    orchestration: Mapping[str, Scalar]
    model_config: Mapping[str, Scalar]
    extensions: Mapping[str, Any] = field(default_factory=dict)

    _SECTIONS = ("prompts", "tools", "orchestration", "model_config")

    def to_doc(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "model_config": dict(self.model_config),
            "orchestration": dict(self.orchestration),
            "prompts": dict(self.prompts),
            "tools": list(self.tools),
        }
        for key, value in self.extensions.items():
            if key in self._SECTIONS:
                raise ValueError(f"extension section shadows builtin section {key!r}")
            doc[key] = value
        return doc

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "Harness":
        extensions = {k: v for k, v in doc.items() if k not in cls._SECTIONS}
        return cls(
            prompts=dict(doc.get("prompts", {})),
            tools=tuple(doc.get("tools", ())),
            orchestration=dict(doc.get("orchestration", {})),
            model_config=dict(doc.get("model_config", {})),
            extensions=extensions,
        )

    def canonical(self) -> str:
        return canonical_json(self.to_doc())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Harness):
            return NotImplemented
        return self.canonical() == other.canonical()

    def __hash__(self) -> int:
        return hash(self.canonical())


def validate_harness(harness: Harness | Mapping[str, Any], for_builtin_worker: bool = True) -> list[Violation]:
    """Schema-check a harness document. Empty result means ok."""
    doc = harness.to_doc() if isinstance(harness, Harness) else dict(harness)
    violations: list[Violation] = []

    prompts = doc.get("prompts")
    if not isinstance(prompts, Mapping):
        violations.append(Violation("prompts", "missing or not a section"))
    else:
        for key, value in prompts.items():
            if not isinstance(value, str):
                violations.append(Violation(f"prompts.{key}", "prompt text must be a string"))

    tools = doc.get("tools")
    if not isinstance(tools, (list, tuple)):
        violations.append(Violation("tools", "missing or not a list"))
    else:
        if for_builtin_worker and len(tools) == 0:
            violations.append(Violation("tools", "must be nonempty for the builtin worker"))
        for i, name in enumerate(tools):
            if not isinstance(name, str) or not name:
                violations.append(Violation(f"tools[{i}]", "tool name must be a nonempty string"))

    orch = doc.get("orchestration")
    if not isinstance(orch, Mapping):
        violations.append(Violation("orchestration", "missing or not a section"))
    else:
        violations.extend(_check_int_range(orch, "orchestration", "planner_depth", PLANNER_DEPTH_RANGE))
        violations.extend(_check_int_range(orch, "orchestration", "max_steps", MAX_STEPS_RANGE))

    model_config = doc.get("model_config")
    if not isinstance(model_config, Mapping):
        violations.append(Violation("model_config", "missing or not a section"))
    else:
        violations.extend(_check_enum(model_config, "model_config", "model_tier", MODEL_TIERS))
        violations.extend(_check_enum(model_config, "model_config", "prompt_style", PROMPT_STYLES))

    return violations


def _check_int_range(section: Mapping[str, Any], prefix: str, key: str, bounds: tuple[int, int]) -> list[Violation]:
    lo, hi = bounds
    if key not in section:
        return [Violation(f"{prefix}.{key}", "missing")]
    value = section[key]
    if not isinstance(value, int) or isinstance(value, bool):
        return [Violation(f"{prefix}.{key}", "must be an integer")]
    if not lo <= value <= hi:
        return [Violation(f"{prefix}.{key}", f"{value} outside {lo}..{hi}")]
    return []


def _check_enum(section: Mapping[str, Any], prefix: str, key: str, allowed: tuple[str, ...]) -> list[Violation]:
    if key not in section:
        return [Violation(f"{prefix}.{key}", "missing")]
    if section[key] not in allowed:
        return [Violation(f"{prefix}.{key}", f"{section[key]!r} not one of {list(allowed)}")]
    return []


# ---------------------------------------------------------------------------
# Traces


@dataclass(frozen=True)
class Step:
    index: int  # 1-based, contiguous
    action: Mapping[str, Any]  # {"tool": name, "args": {...}}
    observation: str  # environment state as perceived by the worker
    llm_time_ms: int
    tool_time_ms: int

    def to_doc(self) -> dict[str, Any]:
        return {
            "action": dict(self.action),
            "index": self.index,
            "llm_time_ms": self.llm_time_ms,
            "observation": self.observation,
            "tool_time_ms": self.tool_time_ms,
        }

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "Step":
        return cls(
            index=doc["index"],
            action=dict(doc["action"]),
            observation=doc["observation"],
            llm_time_ms=doc["llm_time_ms"],
            tool_time_ms=doc["tool_time_ms"],
        )


@dataclass(frozen=True)
class Trace:
    steps: tuple[Step, ...]
    claimed_final_state: str
    llm_time_ms: int
    tool_time_ms: int

    def __post_init__(self) -> None:
        for violation in validate_trace_shape(self):
            raise ValueError(str(violation))

    def to_doc(self) -> dict[str, Any]:
        return {
            "claimed_final_state": self.claimed_final_state,
            "steps": [s.to_doc() for s in self.steps],
            "totals": {"llm_time_ms": self.llm_time_ms, "tool_time_ms": self.tool_time_ms},
        }

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "Trace":
        totals = doc["totals"]
        return cls(
            steps=tuple(Step.from_doc(s) for s in doc["steps"]),
            claimed_final_state=doc["claimed_final_state"],
            llm_time_ms=totals["llm_time_ms"],
            tool_time_ms=totals["tool_time_ms"],
        )


def validate_trace_shape(trace: Trace) -> list[Violation]:
    """Structural invariants: contiguous indices, nonnegative times, exact totals."""
    violations: list[Violation] = []
    llm_sum = 0
    tool_sum = 0
    for pos, step in enumerate(trace.steps, start=1):
        if step.index != pos:
            violations.append(Violation(f"steps[{pos - 1}].index", f"expected {pos}, got {step.index}"))
        if step.llm_time_ms < 0 or step.tool_time_ms < 0:
            violations.append(Violation(f"steps[{pos - 1}]", "negative time"))
        if "tool" not in step.action:
            violations.append(Violation(f"steps[{pos - 1}].action", "missing tool name"))
        llm_sum += step.llm_time_ms
        tool_sum += step.tool_time_ms
    if trace.llm_time_ms != llm_sum:
        violations.append(Violation("totals.llm_time_ms", f"expected {llm_sum}, got {trace.llm_time_ms}"))
    if trace.tool_time_ms != tool_sum:
        violations.append(Violation("totals.tool_time_ms", f"expected {tool_sum}, got {trace.tool_time_ms}"))
    return violations


# ---------------------------------------------------------------------------
# Scores


class _MinScore:
    """Sentinel strictly below every constructible Score; not a Score itself."""

    _instance: "_MinScore | None" = None

    def __new__(cls) -> "_MinScore":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "MIN_SCORE"


MIN_SCORE = _MinScore()


@dataclass(frozen=True)
class Score:
    passed: bool
    criteria_fraction: Fraction
    total_time_ms: int

    def __post_init__(self) -> None:
        frac = self.criteria_fraction
        if not isinstance(frac, Fraction):
            object.__setattr__(self, "criteria_fraction", Fraction(frac))
            frac = self.criteria_fraction
        if not 0 <= frac <= 1:
            raise ValueError(f"criteria_fraction {frac} outside [0, 1]")
        if self.total_time_ms < 0:
            raise ValueError("total_time_ms must be nonnegative")
        if self.passed != (frac == 1):
            raise ValueError(f"passed={self.passed} inconsistent with criteria_fraction={frac}")

    def to_doc(self) -> dict[str, Any]:
        return {
            "criteria_fraction": fraction_to_text(self.criteria_fraction),
            "passed": self.passed,
            "total_time_ms": self.total_time_ms,
        }

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "Score":
        return cls(
            passed=doc["passed"],
            criteria_fraction=fraction_from_text(doc["criteria_fraction"]),
            total_time_ms=doc["total_time_ms"],
        )


ScoreLike = Score | _MinScore


def score_to_doc(score: ScoreLike) -> Any:
    return "MIN_SCORE" if isinstance(score, _MinScore) else score.to_doc()


def score_from_doc(doc: Any) -> ScoreLike:
    return MIN_SCORE if doc == "MIN_SCORE" else Score.from_doc(doc)


def compare_scores(a: ScoreLike, b: ScoreLike) -> int:
    """Total order: -1 less, 0 equal, 1 greater.

    Lexicographic on (passed desc, criteria_fraction desc, total_time_ms asc);
    MIN_SCORE sorts below everything.
    """
    a_min = isinstance(a, _MinScore)
    b_min = isinstance(b, _MinScore)
    if a_min or b_min:
        return (b_min and not a_min) - (a_min and not b_min)
    if a.passed != b.passed:
        return 1 if a.passed else -1
    if a.criteria_fraction != b.criteria_fraction:
        return 1 if a.criteria_fraction > b.criteria_fraction else -1
    if a.total_time_ms != b.total_time_ms:
        return 1 if a.total_time_ms < b.total_time_ms else -1
    return 0


def scalarize(score: ScoreLike, time_budget_ms: int) -> Fraction:
    """Embed the two-tier score into [0, 1], exactly.

    0.9 weight on the criteria fraction plus, for passing runs only, up to 0.1
    for finishing under the time budget. Any passing score lands at >= 0.9 and
    any failing score strictly below, so the embedding never reorders scores
    across the pass/fail boundary. MIN_SCORE maps to 0.
    """
    if time_budget_ms <= 0:
        raise ValueError("time_budget_ms must be positive")
    if isinstance(score, _MinScore):
        return Fraction(0)
    base = Fraction(9, 10) * score.criteria_fraction
    if not score.passed:
        return base
    slack = max(Fraction(0), 1 - Fraction(score.total_time_ms, time_budget_ms))
    return base + Fraction(1, 10) * slack


# ---------------------------------------------------------------------------
# Evaluation reports


@dataclass(frozen=True)
class CriterionVerdict:
    criterion_id: str
    passed: bool
    evidence: str

    def to_doc(self) -> dict[str, Any]:
        return {"criterion_id": self.criterion_id, "evidence": self.evidence, "passed": self.passed}

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "CriterionVerdict":
        return cls(criterion_id=doc["criterion_id"], passed=doc["passed"], evidence=doc["evidence"])


@dataclass(frozen=True)
class Audit:
    llm_time_ms: int
    tool_time_ms: int
    dominant_bottleneck: str  # "llm" | "tool"; ties go to llm

    def to_doc(self) -> dict[str, Any]:
        return {
            "dominant_bottleneck": self.dominant_bottleneck,
            "llm_time_ms": self.llm_time_ms,
            "tool_time_ms": self.tool_time_ms,
        }

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "Audit":
        return cls(
            llm_time_ms=doc["llm_time_ms"],
            tool_time_ms=doc["tool_time_ms"],
            dominant_bottleneck=doc["dominant_bottleneck"],
        )


@dataclass(frozen=True)
class EvaluationReport:
    criterion_verdicts: tuple[CriterionVerdict, ...]
    state_verified: bool
    first_divergence: int | None  # step index; len(steps)+1 flags a lying final claim
    audit: Audit
    score: Score

    def __post_init__(self) -> None:
        for violation in validate_report(self):
            raise ValueError(str(violation))

    def to_doc(self) -> dict[str, Any]:
        return {
            "audit": self.audit.to_doc(),
            "criterion_verdicts": [v.to_doc() for v in self.criterion_verdicts],
            "first_divergence": self.first_divergence,
            "score": self.score.to_doc(),
            "state_verified": self.state_verified,
        }

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "EvaluationReport":
        return cls(
            criterion_verdicts=tuple(CriterionVerdict.from_doc(v) for v in doc["criterion_verdicts"]),
            state_verified=doc["state_verified"],
            first_divergence=doc["first_divergence"],
            audit=Audit.from_doc(doc["audit"]),
            score=Score.from_doc(doc["score"]),
        )


def validate_report(report: EvaluationReport) -> list[Violation]:
    violations: list[Violation] = []
    if report.score.passed:
        if not all(v.passed for v in report.criterion_verdicts):
            violations.append(Violation("score.passed", "true despite a failed criterion verdict"))
        if not report.state_verified:
            violations.append(Violation("score.passed", "true despite failed state verification"))
    if report.state_verified and report.first_divergence is not None:
        violations.append(Violation("first_divergence", "set although state_verified is true"))
    if not report.state_verified and report.first_divergence is None:
        violations.append(Violation("first_divergence", "missing although state_verified is false"))
    if report.audit.dominant_bottleneck not in ("llm", "tool"):
        violations.append(Violation("audit.dominant_bottleneck", "must be 'llm' or 'tool'"))
    return violations


# ---------------------------------------------------------------------------
# History


@dataclass(frozen=True)
class HistoryEntry:
    iteration: int  # k, 1-based; the entry holds the harness that was executed
    harness: Harness
    report: EvaluationReport
    score: Score
    verdict: str  # IMPROVED | REGRESSED

    def to_doc(self) -> dict[str, Any]:
        return {
            "harness": self.harness.to_doc(),
            "iteration": self.iteration,
            "report": self.report.to_doc(),
            "score": self.score.to_doc(),
            "verdict": self.verdict,
        }

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "HistoryEntry":
        return cls(
            iteration=doc["iteration"],
            harness=Harness.from_doc(doc["harness"]),
            report=EvaluationReport.from_doc(doc["report"]),
            score=Score.from_doc(doc["score"]),
            verdict=doc["verdict"],
        )


# ---------------------------------------------------------------------------
# Meta-level history


@dataclass(frozen=True)
class TaskResult:
    """Outcome of one inner run inside a meta round."""

    task_id: str
    best_score: "ScoreLike"
    scalar: Fraction  # exact scalarized best score
    history_digest: str  # digest of the inner run log text
    history_path: str  # relative path of that log under the run directory

    def to_doc(self) -> dict[str, Any]:
        return {
            "best_score": score_to_doc(self.best_score),
            "history_digest": self.history_digest,
            "history_path": self.history_path,
            "scalar": fraction_to_text(self.scalar),
            "task_id": self.task_id,
        }

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "TaskResult":
        return cls(
            task_id=doc["task_id"],
            best_score=score_from_doc(doc["best_score"]),
            scalar=fraction_from_text(doc["scalar"]),
            history_digest=doc["history_digest"],
            history_path=doc["history_path"],
        )


@dataclass(frozen=True)
class MetaHistoryEntry:
    round: int  # j, 0-based; the entry holds the blueprint that was run
    blueprint: "Blueprint"
    task_results: tuple[TaskResult, ...]
    meta_score: Fraction  # mean task scalar, quantized to 1e-6
    verdict: str  # IMPROVED | REGRESSED

    def to_doc(self) -> dict[str, Any]:
        return {
            "blueprint": self.blueprint.to_doc(),
            "meta_score": fixed6(self.meta_score),
            "round": self.round,
            "task_results": [r.to_doc() for r in self.task_results],
            "verdict": self.verdict,
        }

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "MetaHistoryEntry":
        return cls(
            round=doc["round"],
            blueprint=Blueprint.from_doc(doc["blueprint"]),
            task_results=tuple(TaskResult.from_doc(r) for r in doc["task_results"]),
            meta_score=scalar_to_fraction(doc["meta_score"]),
            verdict=doc["verdict"],
        )


# ---------------------------------------------------------------------------
# Blueprints


@dataclass(frozen=True)
class WorkerBinding:
    kind: str  # "builtin" | "external"
    command: str = ""
    args: tuple[str, ...] = ()
    timeout_ms: int = 0

    def to_doc(self) -> dict[str, Any]:
        if self.kind == "builtin":
            return {"kind": "builtin"}
        return {"args": list(self.args), "command": self.command, "kind": self.kind, "timeout_ms": self.timeout_ms}

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "WorkerBinding":
        return cls(
            kind=doc["kind"],
            command=doc.get("command", ""),
            args=tuple(doc.get("args", ())),
            timeout_ms=doc.get("timeout_ms", 0),
        )


@dataclass(frozen=True)
class EvolutionStrategy:
    kind: str  # random | hill_climb | exhaustive | external
    params: Mapping[str, Scalar] = field(default_factory=dict)
    command: str = ""
    args: tuple[str, ...] = ()
    timeout_ms: int = 0

    def to_doc(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"kind": self.kind, "params": dict(self.params)}
        if self.kind == "external":
            doc.update({"args": list(self.args), "command": self.command, "timeout_ms": self.timeout_ms})
        return doc

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "EvolutionStrategy":
        return cls(
            kind=doc["kind"],
            params=dict(doc.get("params", {})),
            command=doc.get("command", ""),
            args=tuple(doc.get("args", ())),
            timeout_ms=doc.get("timeout_ms", 0),
        )


@dataclass(frozen=True)
class LoopConfig:
    K: int
    parallelism: int = 1
    early_stop: Scalar | None = None  # scalarized threshold; absent by default

    def to_doc(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"K": self.K, "parallelism": self.parallelism}
        if self.early_stop is not None:
            doc["early_stop"] = self.early_stop
        return doc

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "LoopConfig":
        return cls(K=doc["K"], parallelism=doc.get("parallelism", 1), early_stop=doc.get("early_stop"))


@dataclass(frozen=True)
class Blueprint:
    """Full specification of one harness-evolution run."""

    worker_binding: WorkerBinding
    initial_harness: Harness
    evaluator_config: Mapping[str, Scalar]
    evolution_strategy: EvolutionStrategy
    loop: LoopConfig

    def to_doc(self) -> dict[str, Any]:
        return {
            "evaluator_config": dict(self.evaluator_config),
            "evolution_strategy": self.evolution_strategy.to_doc(),
            "initial_harness": self.initial_harness.to_doc(),
            "loop": self.loop.to_doc(),
            "worker_binding": self.worker_binding.to_doc(),
        }

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "Blueprint":
        return cls(
            worker_binding=WorkerBinding.from_doc(doc["worker_binding"]),
            initial_harness=Harness.from_doc(doc["initial_harness"]),
            evaluator_config=dict(doc["evaluator_config"]),
            evolution_strategy=EvolutionStrategy.from_doc(doc["evolution_strategy"]),
            loop=LoopConfig.from_doc(doc["loop"]),
        )

    def canonical(self) -> str:
        return canonical_json(self.to_doc())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Blueprint):
            return NotImplemented
        return self.canonical() == other.canonical()

    def __hash__(self) -> int:
        return hash(self.canonical())

    def time_budget_ms(self) -> int:
        return int(self.evaluator_config["time_budget_ms"])

    def early_stop_threshold(self) -> Fraction | None:
        if self.loop.early_stop is None:
            return None
        return scalar_to_fraction(self.loop.early_stop)


def validate_blueprint(blueprint: Blueprint) -> list[Violation]:
    violations: list[Violation] = []

    wb = blueprint.worker_binding
    if wb.kind not in ("builtin", "external"):
        violations.append(Violation("worker_binding.kind", f"unknown kind {wb.kind!r}"))
    if wb.kind == "external":
        if not wb.command:
            violations.append(Violation("worker_binding.command", "missing"))
        if wb.timeout_ms <= 0:
            violations.append(Violation("worker_binding.timeout_ms", "must be positive"))

    for v in validate_harness(blueprint.initial_harness, for_builtin_worker=wb.kind == "builtin"):
        violations.append(Violation(f"initial_harness.{v.path}", v.message))

    budget = blueprint.evaluator_config.get("time_budget_ms")
    if not isinstance(budget, int) or isinstance(budget, bool) or budget <= 0:
        violations.append(Violation("evaluator_config.time_budget_ms", "must be a positive integer"))

    strat = blueprint.evolution_strategy
    if strat.kind not in EVOLUTION_KINDS:
        violations.append(Violation("evolution_strategy.kind", f"unknown kind {strat.kind!r}"))
    if strat.kind == "external":
        if not strat.command:
            violations.append(Violation("evolution_strategy.command", "missing"))
        if strat.timeout_ms <= 0:
            violations.append(Violation("evolution_strategy.timeout_ms", "must be positive"))

    if blueprint.loop.K < 0:
        violations.append(Violation("loop.K", "must be >= 0"))
    if blueprint.loop.parallelism < 1:
        violations.append(Violation("loop.parallelism", "must be >= 1"))
    if blueprint.loop.early_stop is not None:
        try:
            scalar_to_fraction(blueprint.loop.early_stop)
        except (ValueError, ZeroDivisionError):
            violations.append(Violation("loop.early_stop", "not a numeric scalar"))

    return violations

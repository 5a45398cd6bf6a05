"""Two-level optimizer for agent harnesses.

The inner loop evolves one harness against one task; the meta loop evolves
the blueprint that configures those inner runs. Workers, evaluators, and
evolution agents are pluggable over a line-delimited JSON protocol, and a
deterministic string-rewriting environment makes whole runs reproducible.
"""

from .canon import ENGINE_VERSION, canonical_json, derive_seed, digest_hex, fnv1a64
from .errors import (
    AgentTimeout,
    BlueprintInvalid,
    EmptyAggregate,
    EngineError,
    HarnessInvalid,
    ProtocolError,
    ReportInvalid,
    ResumeMismatch,
    TraceInvalid,
    TrainTestOverlap,
)
from .inner_loop import InnerRunResult, resume_inner_loop, run_inner_loop, select_best
from .meta_loop import MetaRunResult, aggregate, resume_meta_loop, run_meta_loop
from .metrics import (
    NOT_REACHED,
    UNDEFINED,
    ConvergenceRecord,
    convergence_speed,
    final_performance,
    meta_test_report,
    robustness,
)
from .model import (
    IMPROVED,
    MIN_SCORE,
    REGRESSED,
    Audit,
    Blueprint,
    Criterion,
    CriterionVerdict,
    EnvironmentSpec,
    EvaluationReport,
    EvolutionStrategy,
    Harness,
    HistoryEntry,
    LoopConfig,
    MetaHistoryEntry,
    Score,
    Step,
    Task,
    TaskResult,
    Trace,
    Violation,
    WorkerBinding,
    compare_scores,
    scalarize,
    validate_blueprint,
    validate_harness,
)

__version__ = ENGINE_VERSION

__all__ = [
    "ENGINE_VERSION",
    "IMPROVED",
    "MIN_SCORE",
    "NOT_REACHED",
    "REGRESSED",
    "UNDEFINED",
    "AgentTimeout",
    "Audit",
    "Blueprint",
    "BlueprintInvalid",
    "ConvergenceRecord",
    "Criterion",
    "CriterionVerdict",
    "EmptyAggregate",
    "EngineError",
    "EnvironmentSpec",
    "EvaluationReport",
    "EvolutionStrategy",
    "Harness",
    "HarnessInvalid",
    "HistoryEntry",
    "InnerRunResult",
    "LoopConfig",
    "MetaHistoryEntry",
    "MetaRunResult",
    "ProtocolError",
    "ReportInvalid",
    "ResumeMismatch",
    "Score",
    "Step",
    "Task",
    "TaskResult",
    "Trace",
    "TraceInvalid",
    "TrainTestOverlap",
    "Violation",
    "WorkerBinding",
    "aggregate",
    "canonical_json",
    "compare_scores",
    "convergence_speed",
    "derive_seed",
    "digest_hex",
    "final_performance",
    "fnv1a64",
    "meta_test_report",
    "resume_inner_loop",
    "resume_meta_loop",
    "robustness",
    "run_inner_loop",
    "run_meta_loop",
    "scalarize",
    "select_best",
    "validate_blueprint",
    "validate_harness",
]

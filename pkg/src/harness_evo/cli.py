"""Command-line shell around the loops: runs, reports, oracles, conformance.

Five modes. `inner` runs the harness evolution loop on one task, `meta` runs
blueprint meta-evolution over a training set, `report` evaluates a blueprint
on held-out tasks, `oracle` brute-forces a harness space per task as ground
truth, and `conformance` exercises an external agent against the wire
protocol checks.

Each run owns a directory named <mode>_<config digest>_s<seed> under --out,
guarded by a .lock file while active and sealed with a DONE marker. The
digest covers the fully resolved run inputs, so identical configurations
land in the same directory and re-running overwrites it byte-identically.
A JSON config file (--config) supplies defaults; explicit flags win.

Exit codes: 0 success, 2 invalid configuration or input files, 3 agent or
protocol failure (including failed conformance checks), 4 resume mismatch.
Diagnostics go to stderr at the level set by HARNESS_EVO_LOG_LEVEL (error,
info, or debug); the one-line summary of a successful run goes to stdout.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping, Sequence

from .canon import ENGINE_VERSION, canonical_json, digest_text_hex, fixed6, scalar_to_fraction
from .errors import EngineError, ResumeMismatch
from .inner_loop import resume_inner_loop, run_inner_loop_logged
from .meta_loop import resume_meta_loop, run_meta_loop_logged
from .metrics import ConvergenceRecord, blueprint_provenance, meta_test_report, render_report, render_series
from .model import (
    IMPROVED,
    MIN_SCORE,
    Blueprint,
    LoopConfig,
    ScoreLike,
    Task,
    validate_blueprint,
)
from .protocol import AgentBinding, run_conformance
from .simkit import HarnessSpace, MetaSpace, brute_force_best, default_meta_space, task_from_file_doc

log = logging.getLogger("harness_evo.cli")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_AGENT = 3
EXIT_RESUME = 4

_LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


class ConfigError(Exception):
    """Anything wrong with flags, files, or their contents."""


# ---------------------------------------------------------------------------
# Input loading


def _load_json(path: str, what: str) -> Any:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"{what} file not found: {path}")
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot parse {what} file {path}: {exc}") from exc


def _load_task(path: str) -> Task:
    doc = _load_json(path, "task")
    try:
        return task_from_file_doc(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid task file {path}: {exc}") from exc


def _load_tasks(path: str) -> list[Task]:
    doc = _load_json(path, "task list")
    if not isinstance(doc, list):
        raise ConfigError(f"task list file {path} must hold a JSON array")
    try:
        tasks = [task_from_file_doc(d) for d in doc]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid task in {path}: {exc}") from exc
    ids = [t.id for t in tasks]
    if len(set(ids)) != len(ids):
        raise ConfigError(f"duplicate task ids in {path}")
    return tasks


def _load_blueprint(path: str) -> tuple[Blueprint, list[str]]:
    """Accepts a bare blueprint document or one wrapped with provenance."""
    doc = _load_json(path, "blueprint")
    try:
        blueprint, training_ids = blueprint_provenance(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid blueprint file {path}: {exc}") from exc
    problems = validate_blueprint(blueprint)
    if problems:
        raise ConfigError(f"invalid blueprint {path}: " + "; ".join(str(v) for v in problems))
    return blueprint, training_ids


def _override_k(blueprint: Blueprint, k: int | None) -> Blueprint:
    if k is None:
        return blueprint
    if k < 0:
        raise ConfigError("-K must be >= 0")
    return Blueprint(
        worker_binding=blueprint.worker_binding,
        initial_harness=blueprint.initial_harness,
        evaluator_config=blueprint.evaluator_config,
        evolution_strategy=blueprint.evolution_strategy,
        loop=LoopConfig(
            K=k, parallelism=blueprint.loop.parallelism, early_stop=blueprint.loop.early_stop
        ),
    )


def _load_meta_space(path: str | None, base: Blueprint) -> MetaSpace:
    if path is None:
        space_name = str(base.evolution_strategy.params.get("space", "restricted"))
        return default_meta_space(space_name)
    doc = _load_json(path, "meta space")
    try:
        from .model import Harness

        return MetaSpace(
            base=base,
            initial_harnesses=[Harness.from_doc(h) for h in doc["initial_harnesses"]],
            kinds=tuple(doc["kinds"]),
            params_choices=tuple(doc["params_choices"]),
            k_values=tuple(doc["k_values"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid meta space file {path}: {exc}") from exc


def _meta_space_doc(space: MetaSpace) -> dict[str, Any]:
    return {
        "initial_harnesses": [h.to_doc() for h in space.axes["initial_harness"]],
        "k_values": list(space.axes["K"]),
        "kinds": list(space.axes["kind"]),
        "params_choices": [dict(p) for p in space.axes["params"]],
    }


def _parse_threshold(raw: Any) -> Fraction:
    try:
        threshold = scalar_to_fraction(raw)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse threshold {raw!r}: {exc}") from exc
    if not Fraction(0) <= threshold <= Fraction(1):
        raise ConfigError(f"threshold {raw!r} outside [0, 1]")
    return threshold


# ---------------------------------------------------------------------------
# Run directories


class RunDir:
    """Exclusive owner of one run directory; lock on enter, marker on seal."""

    def __init__(self, parent: str, mode: str, config_doc: Any, seed: int) -> None:
        digest = digest_text_hex(canonical_json(config_doc))
        self.path = Path(parent) / f"{mode}_{digest}_s{seed}"
        self._lock = self.path / ".lock"

    def __enter__(self) -> "RunDir":
        self.path.mkdir(parents=True, exist_ok=True)
        try:
            fd = os.open(self._lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise ConfigError(
                f"run directory {self.path} is locked by another process "
                f"(remove {self._lock} if that process is gone)"
            ) from None
        os.close(fd)
        return self

    def __exit__(self, *exc_info: object) -> None:
        try:
            os.unlink(self._lock)
        except FileNotFoundError:
            pass

    def seal(self) -> None:
        (self.path / "DONE").write_text("", encoding="utf-8")

    def write(self, name: str, text: str) -> None:
        target = self.path / name
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text, encoding="utf-8")


def _format_score(score: ScoreLike) -> str:
    if score is MIN_SCORE:
        return "MIN_SCORE"
    status = "pass" if score.passed else "fail"
    return f"{status} {score.criteria_fraction} {score.total_time_ms}ms"


# ---------------------------------------------------------------------------
# Modes


def cmd_run_inner(cfg: Mapping[str, Any]) -> int:
    task = _load_task(_require(cfg, "task"))
    blueprint, _ = _load_blueprint(_require(cfg, "blueprint"))
    blueprint = _override_k(blueprint, cfg.get("K"))
    seed = int(cfg.get("seed") or 0)

    config_doc = {"blueprint": blueprint.to_doc(), "mode": "inner", "seed": seed, "task": task.to_doc()}
    with RunDir(cfg.get("out") or "runs", "inner", config_doc, seed) as run_dir:
        log.info("inner run: task %s, K=%d, dir %s", task.id, blueprint.loop.K, run_dir.path)
        log_path = run_dir.path / "run.log"
        if cfg.get("resume"):
            result = resume_inner_loop(log_path, blueprint, task, seed)
        else:
            result, _ = run_inner_loop_logged(task, blueprint, seed, log_path)
        run_dir.write("result.json", canonical_json(result.to_doc()) + "\n")
        run_dir.seal()
        improved = sum(1 for e in result.history if e.verdict == IMPROVED)
        regressed = len(result.history) - improved
        print(
            f"inner {task.id} best={_format_score(result.best_score)} "
            f"improved={improved} regressed={regressed} "
            f"stopped_early={str(result.stopped_early).lower()} dir={run_dir.path}"
        )
    return EXIT_OK


def cmd_run_meta(cfg: Mapping[str, Any]) -> int:
    tasks = _load_tasks(_require(cfg, "tasks"))
    blueprint0, _ = _load_blueprint(_require(cfg, "blueprint"))
    blueprint0 = _override_k(blueprint0, cfg.get("K"))
    if cfg.get("J") is None:
        raise ConfigError("meta mode requires -J (number of rounds)")
    rounds = int(cfg["J"])
    if rounds < 1:
        raise ConfigError("-J must be >= 1")
    seed = int(cfg.get("seed") or 0)
    strategy_name = cfg.get("meta_strategy") or "hill_climb"
    if strategy_name not in ("exhaustive", "hill_climb", "random"):
        raise ConfigError(f"unknown meta strategy {strategy_name!r}")
    meta_space = _load_meta_space(cfg.get("meta_space"), blueprint0)
    parallelism = int(cfg["parallelism"]) if cfg.get("parallelism") is not None else None
    binding = AgentBinding(role="meta_evolution", kind="builtin", name=strategy_name)

    config_doc = {
        "J": rounds,
        "blueprint": blueprint0.to_doc(),
        "meta_space": _meta_space_doc(meta_space),
        "meta_strategy": strategy_name,
        "mode": "meta",
        "seed": seed,
        "tasks": [t.to_doc() for t in tasks],
    }
    with RunDir(cfg.get("out") or "runs", "meta", config_doc, seed) as run_dir:
        log.info("meta run: %d tasks, J=%d, dir %s", len(tasks), rounds, run_dir.path)
        log_path = run_dir.path / "meta.log"
        if cfg.get("resume"):
            result = resume_meta_loop(
                log_path, tasks, binding, blueprint0, rounds, seed,
                meta_space=meta_space, out_dir=run_dir.path, parallelism=parallelism,
            )
        else:
            result, _ = run_meta_loop_logged(
                tasks, binding, blueprint0, rounds, seed, log_path,
                meta_space=meta_space, out_dir=run_dir.path, parallelism=parallelism,
            )
        best_doc = {
            "blueprint": result.best_blueprint.to_doc(),
            "provenance": {
                "engine_version": ENGINE_VERSION,
                "seed": seed,
                "training_task_ids": sorted(t.id for t in tasks),
            },
        }
        run_dir.write("best_blueprint.json", canonical_json(best_doc) + "\n")
        run_dir.seal()
        print(
            f"meta tasks={len(tasks)} rounds={len(result.meta_history)} "
            f"best_meta_score={fixed6(result.best_meta_score)} "
            f"stopped_early={str(result.stopped_early).lower()} dir={run_dir.path}"
        )
    return EXIT_OK


def cmd_report(cfg: Mapping[str, Any]) -> int:
    blueprint_doc = _load_json(_require(cfg, "blueprint"), "blueprint")
    try:
        blueprint, training_ids = blueprint_provenance(blueprint_doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid blueprint file: {exc}") from exc
    problems = validate_blueprint(blueprint)
    if problems:
        raise ConfigError("invalid blueprint: " + "; ".join(str(v) for v in problems))
    tasks = _load_tasks(_require(cfg, "tasks"))
    if cfg.get("threshold") is None:
        raise ConfigError("report mode requires --threshold (no default)")
    threshold = _parse_threshold(cfg["threshold"])
    k = int(cfg["K"]) if cfg.get("K") is not None else blueprint.loop.K
    seed = int(cfg.get("seed") or 0)
    parallelism = int(cfg["parallelism"]) if cfg.get("parallelism") is not None else None

    config_doc = {
        "K": k,
        "blueprint": blueprint.to_doc(),
        "mode": "report",
        "seed": seed,
        "tasks": [t.to_doc() for t in tasks],
        "threshold": str(cfg["threshold"]),
        "training_task_ids": sorted(training_ids),
    }
    with RunDir(cfg.get("out") or "runs", "report", config_doc, seed) as run_dir:
        log.info("report: %d test tasks, K=%d, dir %s", len(tasks), k, run_dir.path)
        report = meta_test_report(blueprint_doc if isinstance(blueprint_doc, dict) else blueprint,
                                  tasks, k, seed, threshold, parallelism=parallelism)
        run_dir.write("report.json", render_report(report))
        for record_doc in report["per_task"]:
            record = ConvergenceRecord.from_doc(record_doc)
            run_dir.write(f"series/{record.task_id}.txt", render_series(record))
        run_dir.seal()
        metrics = report["metrics"]
        rob = metrics["robustness"]
        print(
            f"report tasks={len(tasks)} final_performance={metrics['final_performance']} "
            f"variance={rob['variance']} not_reached={rob['not_reached_count']} dir={run_dir.path}"
        )
    return EXIT_OK


def cmd_oracle(cfg: Mapping[str, Any]) -> int:
    if cfg.get("task") and cfg.get("tasks"):
        raise ConfigError("give either --task or --tasks, not both")
    if cfg.get("task"):
        tasks = [_load_task(cfg["task"])]
    elif cfg.get("tasks"):
        tasks = _load_tasks(cfg["tasks"])
    else:
        raise ConfigError("oracle mode requires --task or --tasks")
    space_name = cfg.get("space") or "restricted"
    try:
        space = HarnessSpace.from_name(space_name)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"invalid space declaration {space_name!r}: {exc}") from exc
    seed = int(cfg.get("seed") or 0)

    config_doc = {"mode": "oracle", "space": space_name, "tasks": [t.to_doc() for t in tasks]}
    with RunDir(cfg.get("out") or "runs", "oracle", config_doc, seed) as run_dir:
        log.info("oracle: %d tasks over space %s (%d harnesses)", len(tasks), space_name, len(space))
        results = []
        for task in tasks:
            best = brute_force_best(task, space)
            results.append(
                {
                    "harness": best.harness.to_doc(),
                    "index": best.index,
                    "score": best.score.to_doc(),
                    "task_id": task.id,
                }
            )
        doc = {"results": results, "space": space_name}
        run_dir.write("oracle.json", canonical_json(doc) + "\n")
        run_dir.seal()
        passed = sum(1 for r in results if r["score"]["passed"])
        print(f"oracle space={space_name} tasks={len(tasks)} passed={passed} dir={run_dir.path}")
    return EXIT_OK


def cmd_conformance(cfg: Mapping[str, Any]) -> int:
    role = cfg.get("role")
    if role not in ("worker", "evaluator", "evolution", "meta_evolution"):
        raise ConfigError("--role must be one of worker, evaluator, evolution, meta_evolution")
    command = cfg.get("command") or []
    if not command:
        raise ConfigError("conformance mode requires the agent command after the flags")
    timeout_ms = int(cfg.get("timeout_ms") or 5000)
    checks = run_conformance(command[0], tuple(command[1:]), role, timeout_ms=timeout_ms)
    failed = 0
    for check in checks:
        if check.passed:
            print(f"PASS {check.name}")
        else:
            failed += 1
            print(f"FAIL {check.name}: {check.detail}")
    print(f"conformance role={role} passed={len(checks) - failed} failed={failed}")
    return EXIT_OK if failed == 0 else EXIT_AGENT


# ---------------------------------------------------------------------------
# Argument handling


def _require(cfg: Mapping[str, Any], key: str) -> Any:
    value = cfg.get(key)
    if value is None:
        raise ConfigError(f"missing required option --{key.replace('_', '-')}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="harness-evo",
        description="Two-level optimizer for agent harnesses with a deterministic simulation kit.",
    )
    sub = parser.add_subparsers(dest="mode", required=True)

    def common(p: argparse.ArgumentParser, *, parallelism: bool) -> None:
        p.add_argument("--config", help="JSON file with defaults; explicit flags win")
        p.add_argument("--seed", type=int, help="run seed (default 0)")
        p.add_argument("--out", help="parent directory for run directories (default runs/)")
        if parallelism:
            p.add_argument("--parallelism", type=int, help="concurrent per-task inner runs")

    p_inner = sub.add_parser("inner", help="run the harness evolution loop on one task")
    common(p_inner, parallelism=False)
    p_inner.add_argument("--task", help="task file")
    p_inner.add_argument("--blueprint", help="blueprint file")
    p_inner.add_argument("-K", dest="K", type=int, help="override the blueprint's iteration budget")
    p_inner.add_argument("--resume", action="store_true", help="continue from an interrupted run log")

    p_meta = sub.add_parser("meta", help="run blueprint meta-evolution over a training set")
    common(p_meta, parallelism=True)
    p_meta.add_argument("--tasks", help="JSON array of training tasks")
    p_meta.add_argument("--blueprint", help="initial blueprint file")
    p_meta.add_argument("-K", dest="K", type=int, help="override the initial blueprint's K")
    p_meta.add_argument("-J", dest="J", type=int, help="number of meta rounds")
    p_meta.add_argument("--meta-strategy", dest="meta_strategy",
                        choices=("exhaustive", "hill_climb", "random"),
                        help="builtin meta evolution strategy (default hill_climb)")
    p_meta.add_argument("--meta-space", dest="meta_space",
                        help="JSON file declaring the blueprint grid axes")
    p_meta.add_argument("--resume", action="store_true", help="continue from an interrupted meta log")

    p_report = sub.add_parser("report", help="evaluate a blueprint on held-out tasks")
    common(p_report, parallelism=True)
    p_report.add_argument("--tasks", help="JSON array of held-out test tasks")
    p_report.add_argument("--blueprint", help="blueprint file, bare or with provenance")
    p_report.add_argument("-K", dest="K", type=int, help="iteration budget per task (default: blueprint's K)")
    p_report.add_argument("--threshold", help="convergence threshold in [0,1]; required, no default")

    p_oracle = sub.add_parser("oracle", help="brute-force a harness space per task")
    common(p_oracle, parallelism=False)
    p_oracle.add_argument("--task", help="single task file")
    p_oracle.add_argument("--tasks", help="JSON array of tasks")
    p_oracle.add_argument("--space", help="harness space name (default restricted)")

    p_conf = sub.add_parser("conformance", help="check an external agent against the wire protocol")
    p_conf.add_argument("--config", help="JSON file with defaults; explicit flags win")
    p_conf.add_argument("--role", help="agent role to exercise")
    p_conf.add_argument("--timeout-ms", dest="timeout_ms", type=int, help="per-request timeout (default 5000)")
    p_conf.add_argument("command", nargs="*", help="agent command and arguments")

    return parser


def resolve_config(args: argparse.Namespace) -> dict[str, Any]:
    """Merge flag values over config-file defaults; flags win."""
    cfg: dict[str, Any] = {}
    if getattr(args, "config", None):
        doc = _load_json(args.config, "config")
        if not isinstance(doc, dict):
            raise ConfigError("config file must hold a JSON object")
        cfg.update(doc)
    for key, value in vars(args).items():
        if key in ("config", "mode"):
            continue
        if value is None:
            continue
        if key == "resume" and value is False and "resume" in cfg:
            continue  # an unset store_true flag must not mask a config default
        if key == "command" and value == [] and cfg.get("command"):
            continue
        cfg[key] = value
    return cfg


def _configure_logging() -> None:
    raw = os.environ.get("HARNESS_EVO_LOG_LEVEL", "info").lower()
    if raw not in _LOG_LEVELS:
        raise ConfigError(
            f"HARNESS_EVO_LOG_LEVEL must be one of error, info, debug (got {raw!r})"
        )
    logging.basicConfig(
        stream=sys.stderr, level=_LOG_LEVELS[raw], format="%(levelname)s %(name)s: %(message)s"
    )


_COMMANDS = {
    "inner": cmd_run_inner,
    "meta": cmd_run_meta,
    "report": cmd_report,
    "oracle": cmd_oracle,
    "conformance": cmd_conformance,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _configure_logging()
        cfg = resolve_config(args)
        return _COMMANDS[args.mode](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResumeMismatch as exc:
        print(f"resume mismatch: {exc}", file=sys.stderr)
        return EXIT_RESUME
    except EngineError as exc:
        print(f"agent failure: {exc}", file=sys.stderr)
        return EXIT_AGENT


if __name__ == "__main__":
    sys.exit(main())

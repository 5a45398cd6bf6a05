"""Agent contracts and the line-delimited wire protocol for external agents.

Any of the four roles (worker, evaluator, evolution, meta-evolution) can be an
external process. The engine spawns it once per run, handshakes, then speaks
one request line / one response line at a time: each line is one canonical
JSON message with fields type, seq, payload, and a response must echo the
request's seq. The engine validates everything an agent returns; agents are
never trusted to produce schema-valid documents.

Builtin agents short-circuit to the simulation kit, so the same call sites
drive both kinds.
"""

from __future__ import annotations

import json
import logging
import queue
import subprocess
import threading
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from .canon import canonical_json
from .errors import AgentTimeout, BlueprintInvalid, HarnessInvalid, ProtocolError, ReportInvalid, TraceInvalid
from .model import (
    Blueprint,
    EvaluationReport,
    EvolutionStrategy,
    Harness,
    HistoryEntry,
    MetaHistoryEntry,
    Score,
    Task,
    Trace,
    WorkerBinding,
    validate_blueprint,
    validate_harness,
)
from .simkit import (
    BUILTIN_META_STRATEGIES,
    BUILTIN_STRATEGIES,
    MetaSpace,
    sim_evaluate,
    sim_execute,
    space_from_params,
)

log = logging.getLogger("harness_evo.protocol")

PROTOCOL_VERSION = 1

ROLES = ("worker", "evaluator", "evolution", "meta_evolution")

REQUEST_TYPES = {
    "worker": "execute_req",
    "evaluator": "evaluate_req",
    "evolution": "evolve_req",
    "meta_evolution": "meta_evolve_req",
}


@dataclass(frozen=True)
class AgentBinding:
    """One invocable agent: a builtin entry point or an external command."""

    role: str
    kind: str  # builtin | external
    name: str = ""  # builtin implementation name ("sim" or a strategy kind)
    command: str = ""
    args: tuple[str, ...] = ()
    timeout_ms: int = 0

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ValueError(f"unknown agent role {self.role!r}")
        if self.kind == "external" and (not self.command or self.timeout_ms <= 0):
            raise ValueError(f"external {self.role} binding needs command and positive timeout_ms")

    @classmethod
    def for_worker(cls, binding: WorkerBinding) -> "AgentBinding":
        if binding.kind == "builtin":
            return cls(role="worker", kind="builtin", name="sim")
        return cls(
            role="worker",
            kind="external",
            command=binding.command,
            args=binding.args,
            timeout_ms=binding.timeout_ms,
        )

    @classmethod
    def for_evaluator(cls) -> "AgentBinding":
        return cls(role="evaluator", kind="builtin", name="sim")

    @classmethod
    def for_evolution(cls, strategy: EvolutionStrategy) -> "AgentBinding":
        if strategy.kind == "external":
            return cls(
                role="evolution",
                kind="external",
                command=strategy.command,
                args=strategy.args,
                timeout_ms=strategy.timeout_ms,
            )
        return cls(role="evolution", kind="builtin", name=strategy.kind)


class ExternalAgentSession:
    """One spawned agent process, handshaken, with one in-flight request."""

    def __init__(self, binding: AgentBinding) -> None:
        if binding.kind != "external":
            raise ValueError("sessions exist only for external bindings")
        self.binding = binding
        self._seq = 0
        self._lines: queue.Queue[str | None] = queue.Queue()
        argv = [binding.command, *binding.args]
        log.debug("spawning %s agent: %s", binding.role, argv)
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise ProtocolError(f"cannot spawn {binding.role} agent {binding.command!r}: {exc}") from exc
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()
        self._handshake()

    def _pump(self) -> None:
        assert self._proc.stdout is not None
        for line in self._proc.stdout:
            self._lines.put(line.rstrip("\n"))
        self._lines.put(None)

    def _send(self, doc: Mapping[str, Any]) -> None:
        assert self._proc.stdin is not None
        try:
            self._proc.stdin.write(canonical_json(doc) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ProtocolError(f"{self.binding.role} agent closed its input: {exc}") from exc

    def _recv_line(self, what: str) -> str:
        try:
            line = self._lines.get(timeout=self.binding.timeout_ms / 1000)
        except queue.Empty:
            self.kill()
            raise AgentTimeout(
                f"{self.binding.role} agent produced no {what} within {self.binding.timeout_ms} ms"
            ) from None
        if line is None:
            raise ProtocolError(f"{self.binding.role} agent closed its output before {what}")
        return line

    def _recv_doc(self, what: str) -> dict[str, Any]:
        line = self._recv_line(what)
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            self.kill()
            raise ProtocolError(f"{self.binding.role} agent sent unparseable {what}: {line[:200]!r}") from exc
        if not isinstance(doc, dict):
            self.kill()
            raise ProtocolError(f"{self.binding.role} agent sent non-object {what}")
        return doc

    def _handshake(self) -> None:
        self._send({"protocol_version": PROTOCOL_VERSION, "role": self.binding.role, "type": "hello"})
        ack = self._recv_doc("hello_ack")
        if ack.get("type") != "hello_ack" or ack.get("protocol_version") != PROTOCOL_VERSION:
            self.kill()
            raise ProtocolError(f"{self.binding.role} agent handshake failed: {ack!r}")

    def request(self, msg_type: str, payload: Mapping[str, Any]) -> dict[str, Any]:
        self._seq += 1
        seq = self._seq
        self._send({"payload": payload, "seq": seq, "type": msg_type})
        doc = self._recv_doc(f"response to {msg_type}")
        if doc.get("seq") != seq:
            self.kill()
            raise ProtocolError(
                f"{self.binding.role} agent answered seq {doc.get('seq')!r}, expected {seq}"
            )
        resp_payload = doc.get("payload")
        if not isinstance(resp_payload, dict):
            self.kill()
            raise ProtocolError(f"{self.binding.role} agent sent response without payload object")
        if doc.get("type") == "error":
            raise ProtocolError(
                f"{self.binding.role} agent error: {resp_payload.get('message', '(no message)')}"
            )
        if doc.get("type") != msg_type.replace("_req", "_resp"):
            self.kill()
            raise ProtocolError(f"{self.binding.role} agent answered with type {doc.get('type')!r}")
        return resp_payload

    def kill(self) -> None:
        if self._proc.poll() is None:
            self._proc.kill()
        self._proc.wait()

    def close(self) -> None:
        if self._proc.poll() is None and self._proc.stdin is not None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=1)
            except subprocess.TimeoutExpired:
                self.kill()
        else:
            self._proc.wait()

    def __enter__(self) -> "ExternalAgentSession":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()


# ---------------------------------------------------------------------------
# Call operations


def call_worker(
    binding: AgentBinding, harness: Harness, task: Task, session: ExternalAgentSession | None = None
) -> Trace:
    """Run the task under the harness; validate whatever comes back."""
    if binding.kind == "builtin":
        return sim_execute(harness, task)
    if session is None:
        raise ValueError("external worker requires an open session")
    payload = session.request("execute_req", {"harness": harness.to_doc(), "task": task.to_doc()})
    try:
        trace = Trace.from_doc(payload["trace"])
    except (KeyError, TypeError) as exc:
        raise ProtocolError(f"worker response missing trace fields: {exc}") from exc
    except ValueError as exc:
        raise TraceInvalid(f"worker returned inconsistent trace: {exc}") from exc
    allowed = set(harness.tools)
    for step in trace.steps:
        if step.action.get("tool") not in allowed:
            raise TraceInvalid(
                f"step {step.index} uses tool {step.action.get('tool')!r} outside the harness"
            )
    return trace


def call_evaluator(
    binding: AgentBinding,
    trace: Trace,
    task: Task,
    config: Mapping[str, Any],
    session: ExternalAgentSession | None = None,
) -> tuple[EvaluationReport, Score]:
    if binding.kind == "builtin":
        report = sim_evaluate(trace, task, config)
        return report, report.score
    if session is None:
        raise ValueError("external evaluator requires an open session")
    payload = session.request(
        "evaluate_req", {"config": dict(config), "task": task.to_doc(), "trace": trace.to_doc()}
    )
    try:
        report = EvaluationReport.from_doc(payload["report"])
    except (KeyError, TypeError) as exc:
        raise ProtocolError(f"evaluator response missing report fields: {exc}") from exc
    except ValueError as exc:
        raise ReportInvalid(f"evaluator returned inconsistent report: {exc}") from exc
    return report, report.score


def call_evolution(
    strategy: EvolutionStrategy,
    best: Harness,
    history: Sequence[HistoryEntry],
    seed: int,
    task: Task,
    session: ExternalAgentSession | None = None,
    for_builtin_worker: bool = True,
) -> Harness | None:
    """Next harness proposal, or None when the strategy's space is exhausted.

    The full history goes out on the wire, each entry tagged with the task id;
    the returned harness is schema-validated before the loop may use it.
    """
    if strategy.kind != "external":
        return BUILTIN_STRATEGIES[strategy.kind](best, history, seed, space_from_params(strategy.params))
    if session is None:
        raise ValueError("external evolution agent requires an open session")
    payload = session.request(
        "evolve_req",
        {
            "best": best.to_doc(),
            "history": [{**entry.to_doc(), "task_id": task.id} for entry in history],
            "params": dict(strategy.params),
            "seed": seed,
        },
    )
    if payload.get("space_exhausted") is True:
        return None
    try:
        harness = Harness.from_doc(payload["harness"])
    except (KeyError, TypeError) as exc:
        raise ProtocolError(f"evolution response missing harness: {exc}") from exc
    violations = validate_harness(harness, for_builtin_worker=for_builtin_worker)
    if violations:
        raise HarnessInvalid("; ".join(str(v) for v in violations))
    return harness


def call_meta_evolution(
    binding: AgentBinding,
    best: Blueprint,
    meta_history: Sequence[MetaHistoryEntry],
    seed: int,
    meta_space: MetaSpace | None = None,
    session: ExternalAgentSession | None = None,
) -> Blueprint | None:
    if binding.kind == "builtin":
        if meta_space is None:
            raise ValueError("builtin meta evolution requires a meta space")
        return BUILTIN_META_STRATEGIES[binding.name](best, meta_history, seed, meta_space)
    if session is None:
        raise ValueError("external meta-evolution agent requires an open session")
    payload = session.request(
        "meta_evolve_req",
        {
            "best": best.to_doc(),
            "meta_history": [entry.to_doc() for entry in meta_history],
            "seed": seed,
        },
    )
    if payload.get("space_exhausted") is True:
        return None
    try:
        blueprint = Blueprint.from_doc(payload["blueprint"])
    except (KeyError, TypeError) as exc:
        raise ProtocolError(f"meta-evolution response missing blueprint: {exc}") from exc
    violations = validate_blueprint(blueprint)
    if violations:
        raise BlueprintInvalid("; ".join(str(v) for v in violations))
    return blueprint


# ---------------------------------------------------------------------------
# Conformance suite


@dataclass(frozen=True)
class ConformanceCheck:
    name: str
    passed: bool
    detail: str


def _fixtures() -> dict[str, Any]:
    # deferred import keeps protocol importable without the bundled data
    from .simkit import HarnessSpace, bundled_blueprint, bundled_task

    task = bundled_task("T1")
    space = HarnessSpace.restricted()
    harness = space.harness_at(24)
    trace = sim_execute(harness, task)
    report = sim_evaluate(trace, task)
    entry = HistoryEntry(1, harness, report, report.score, "IMPROVED")
    blueprint = bundled_blueprint("hill_climb")
    from .model import TaskResult, scalarize

    result = TaskResult(
        task_id=task.id,
        best_score=report.score,
        scalar=scalarize(report.score, blueprint.time_budget_ms()),
        history_digest="0" * 16,
        history_path="round_000/T1.log",
    )
    meta_entry = MetaHistoryEntry(0, blueprint, (result,), result.scalar, "IMPROVED")
    return {
        "task": task,
        "harness": harness,
        "trace": trace,
        "entry": entry,
        "blueprint": blueprint,
        "meta_entry": meta_entry,
    }


def run_conformance(
    command: str, args: Sequence[str], role: str, timeout_ms: int = 5000
) -> list[ConformanceCheck]:
    """Drive an external agent through the protocol obligations of its role.

    Checks: handshake, a well-formed round trip, sequence echo across calls,
    and survival of an unknown request type (error response, session alive).
    """
    binding = AgentBinding(
        role=role, kind="external", command=command, args=tuple(args), timeout_ms=timeout_ms
    )
    fx = _fixtures()
    checks: list[ConformanceCheck] = []

    def check(name: str, fn: Any) -> bool:
        try:
            fn()
        except Exception as exc:  # report, never crash the suite
            checks.append(ConformanceCheck(name, False, f"{type(exc).__name__}: {exc}"))
            return False
        checks.append(ConformanceCheck(name, True, "ok"))
        return True

    session: ExternalAgentSession | None = None

    def open_session() -> None:
        nonlocal session
        session = ExternalAgentSession(binding)

    if not check("handshake", open_session):
        return checks
    assert session is not None

    def roundtrip() -> None:
        _role_request(session, role, fx)

    check(f"{role}_roundtrip", roundtrip)

    def seq_echo() -> None:
        before = session._seq
        _role_request(session, role, fx)
        if session._seq != before + 1:
            raise ProtocolError("sequence did not advance")

    check("seq_echo_increments", seq_echo)

    def unknown_type_survives() -> None:
        session._seq += 1
        seq = session._seq
        session._send({"payload": {}, "seq": seq, "type": "bogus_req"})
        doc = session._recv_doc("error response")
        if doc.get("type") != "error":
            raise ProtocolError(f"expected error response, got {doc.get('type')!r}")
        _role_request(session, role, fx)  # session must remain usable

    check("unknown_type_survives", unknown_type_survives)
    session.close()
    return checks


def _role_request(session: ExternalAgentSession, role: str, fx: dict[str, Any]) -> None:
    task: Task = fx["task"]
    if role == "worker":
        trace = call_worker(
            AgentBinding(role="worker", kind="external", command="x", timeout_ms=session.binding.timeout_ms),
            fx["harness"],
            task,
            session=session,
        )
        if not isinstance(trace, Trace):
            raise ProtocolError("no trace")
    elif role == "evaluator":
        report, score = call_evaluator(
            AgentBinding(role="evaluator", kind="external", command="x", timeout_ms=session.binding.timeout_ms),
            fx["trace"],
            task,
            {"strictness": 1, "time_budget_ms": 1000},
            session=session,
        )
        if report.score != score:
            raise ProtocolError("score does not match report")
    elif role == "evolution":
        strategy = EvolutionStrategy(
            kind="external", params={"space": "restricted"}, command="x", timeout_ms=session.binding.timeout_ms
        )
        call_evolution(strategy, fx["harness"], [fx["entry"]], 7, task, session=session)
    elif role == "meta_evolution":
        call_meta_evolution(
            AgentBinding(
                role="meta_evolution", kind="external", command="x", timeout_ms=session.binding.timeout_ms
            ),
            fx["blueprint"],
            [fx["meta_entry"]],
            7,
            session=session,
        )
    else:
        raise ValueError(f"unknown role {role!r}")

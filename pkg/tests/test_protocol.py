"""Wire protocol: sessions, validation, fault containment, conformance."""

from __future__ import annotations

import sys
import time
from pathlib import Path

import pytest

from harness_evo.errors import AgentTimeout, HarnessInvalid, ProtocolError, TraceInvalid
from harness_evo.model import EvolutionStrategy, Harness, HistoryEntry, Task, WorkerBinding
from harness_evo.protocol import (
    AgentBinding,
    ExternalAgentSession,
    call_evaluator,
    call_evolution,
    call_meta_evolution,
    call_worker,
    run_conformance,
)
from harness_evo.simkit import (
    HarnessSpace,
    bundled_blueprint,
    bundled_task,
    evolve_hill_climb,
    sim_evaluate,
    sim_execute,
)

FAKE = str(Path(__file__).with_name("fake_agent.py"))
SPACE = HarnessSpace.restricted()
T1 = bundled_task("T1")


def binding(mode: str, role: str = "worker", timeout_ms: int = 5000) -> AgentBinding:
    return AgentBinding(
        role=role, kind="external", command=sys.executable, args=(FAKE, mode), timeout_ms=timeout_ms
    )


def session(mode: str, role: str = "worker", timeout_ms: int = 5000) -> ExternalAgentSession:
    return ExternalAgentSession(binding(mode, role, timeout_ms))


def entry(harness, task, verdict="IMPROVED", k=1):
    report = sim_evaluate(sim_execute(harness, task), task)
    return HistoryEntry(k, harness, report, report.score, verdict)


# ---------------------------------------------------------------------------
# Builtin dispatch


def test_builtin_worker_and_evaluator_roundtrip():
    wb = AgentBinding.for_worker(WorkerBinding(kind="builtin"))
    harness = SPACE.harness_at(24)
    trace = call_worker(wb, harness, T1)
    assert trace == sim_execute(harness, T1)
    report, score = call_evaluator(AgentBinding.for_evaluator(), trace, T1, {"time_budget_ms": 1000})
    assert score == report.score
    assert score.passed


def test_builtin_evolution_dispatch():
    harness = SPACE.assemble(6, 2, "smart", "terse")
    history = [entry(harness, T1)]
    strategy = EvolutionStrategy(kind="hill_climb", params={"space": "restricted"})
    out = call_evolution(strategy, harness, history, 3, T1)
    assert out == evolve_hill_climb(harness, history, 3, SPACE)


def test_builtin_meta_requires_space():
    b = AgentBinding(role="meta_evolution", kind="builtin", name="hill_climb")
    with pytest.raises(ValueError):
        call_meta_evolution(b, bundled_blueprint("hill_climb"), [], 1, meta_space=None)


# ---------------------------------------------------------------------------
# External sessions: happy path


def test_external_worker_matches_builtin():
    harness = SPACE.harness_at(24)
    with session("ok") as s:
        trace = call_worker(binding("ok"), harness, T1, session=s)
    assert trace == sim_execute(harness, T1)


def test_external_evaluator_matches_builtin():
    harness = SPACE.harness_at(24)
    trace = sim_execute(harness, T1)
    with session("ok", role="evaluator") as s:
        report, score = call_evaluator(binding("ok", "evaluator"), trace, T1, {"time_budget_ms": 1000}, session=s)
    assert report == sim_evaluate(trace, T1)
    assert score == report.score


def test_external_evolution_matches_builtin_and_reuses_session():
    h0 = SPACE.assemble(6, 2, "smart", "terse")
    history = [entry(h0, T1)]
    strategy = EvolutionStrategy(kind="external", params={"space": "restricted"}, command="x", timeout_ms=5000)
    with session("ok", role="evolution") as s:
        first = call_evolution(strategy, h0, history, 11, T1, session=s)
        history.append(entry(first, T1, "REGRESSED", 2))
        second = call_evolution(strategy, h0, history, 12, T1, session=s)
    assert first == evolve_hill_climb(h0, [history[0]], 11, SPACE)
    assert second == evolve_hill_climb(h0, history, 12, SPACE)
    assert s._seq == 2  # one process served both requests


def test_external_meta_evolution_roundtrip():
    bp = bundled_blueprint("hill_climb")
    with session("ok", role="meta_evolution") as s:
        out = call_meta_evolution(binding("ok", "meta_evolution"), bp, [], 5, session=s)
    assert out is not None
    assert out != bp


def test_space_exhausted_crosses_the_wire():
    tiny = HarnessSpace(("swapcase",))
    h0 = tiny.harness_at(0)
    history = [
        entry(tiny.harness_at(i), T1, "IMPROVED" if i == 0 else "REGRESSED", i + 1)
        for i in range(len(tiny))
    ]
    strategy = EvolutionStrategy(kind="external", params={"space": "swapcase"}, command="x", timeout_ms=5000)
    with session("ok", role="evolution") as s:
        out = call_evolution(strategy, h0, history, 1, T1, session=s)
    assert out is None


# ---------------------------------------------------------------------------
# Fault containment


def test_drop_seq_raises_protocol_error():
    with session("drop_seq") as s:
        with pytest.raises(ProtocolError):
            call_worker(binding("drop_seq"), SPACE.harness_at(0), T1, session=s)


def test_garbage_raises_protocol_error():
    with session("garbage") as s:
        with pytest.raises(ProtocolError):
            call_worker(binding("garbage"), SPACE.harness_at(0), T1, session=s)


def test_bad_version_refused():
    with pytest.raises(ProtocolError):
        session("bad_version")


def test_silent_handshake_times_out_within_containment():
    start = time.monotonic()
    with pytest.raises(AgentTimeout):
        session("silent", timeout_ms=300)
    assert time.monotonic() - start < 0.8  # 300ms + 500ms containment


def test_sleeping_agent_times_out_within_containment():
    s = session("sleep", timeout_ms=300)
    start = time.monotonic()
    with pytest.raises(AgentTimeout):
        call_worker(binding("sleep", timeout_ms=300), SPACE.harness_at(0), T1, session=s)
    assert time.monotonic() - start < 0.8
    assert s._proc.poll() is not None  # process was killed, not leaked


def test_dead_agent_raises_protocol_error():
    s = session("die")
    with pytest.raises(ProtocolError):
        call_worker(binding("die"), SPACE.harness_at(0), T1, session=s)


def test_invalid_harness_from_evolution_rejected():
    strategy = EvolutionStrategy(kind="external", params={}, command="x", timeout_ms=5000)
    h0 = SPACE.harness_at(0)
    with session("bad_harness", role="evolution") as s:
        with pytest.raises(HarnessInvalid):
            call_evolution(strategy, h0, [entry(h0, T1)], 1, T1, session=s)


def test_forged_trace_fails_verification_not_protocol():
    # a lying worker is caught by the evaluator, not the transport
    harness = SPACE.harness_at(24)
    with session("lying_trace") as s:
        trace = call_worker(binding("lying_trace"), harness, T1, session=s)
    report = sim_evaluate(trace, T1)
    assert not report.state_verified
    assert not report.score.passed


def test_worker_using_undeclared_tool_rejected():
    # harness declares only append_a; the fake plans with what it's given,
    # so force the mismatch by validating against a different harness
    harness = SPACE.harness_at(24)
    with session("ok") as s:
        payload = s.request("execute_req", {"harness": harness.to_doc(), "task": T1.to_doc()})
    from harness_evo.model import Trace

    trace = Trace.from_doc(payload["trace"])
    narrower = SPACE.harness_at(0)  # append_a only
    with session("ok") as s2:
        with pytest.raises(TraceInvalid):
            # simulate an agent answering with tools outside the declared set
            import harness_evo.protocol as proto

            class Canned:
                binding = binding("ok")

                def request(self, *_a, **_k):
                    return {"trace": trace.to_doc()}

            proto.call_worker(binding("ok"), narrower, T1, session=Canned())


# ---------------------------------------------------------------------------
# Conformance suite


@pytest.mark.parametrize("role", ["worker", "evaluator", "evolution", "meta_evolution"])
def test_conformance_ok_agent_passes_all(role):
    checks = run_conformance(sys.executable, (FAKE, "ok"), role)
    assert [c.name for c in checks] == [
        "handshake",
        f"{role}_roundtrip",
        "seq_echo_increments",
        "unknown_type_survives",
    ]
    assert all(c.passed for c in checks), checks


def test_conformance_reports_failures_without_crashing():
    checks = run_conformance(sys.executable, (FAKE, "drop_seq"), "worker")
    assert checks[0].passed  # handshake fine
    assert not all(c.passed for c in checks)
    checks = run_conformance(sys.executable, (FAKE, "bad_version"), "worker")
    assert not checks[0].passed
    assert len(checks) == 1  # suite stops when no session exists


def test_session_requires_external_binding():
    with pytest.raises(ValueError):
        ExternalAgentSession(AgentBinding(role="worker", kind="builtin", name="sim"))
    with pytest.raises(ValueError):
        AgentBinding(role="worker", kind="external", command="", timeout_ms=100)
    with pytest.raises(ValueError):
        AgentBinding(role="chaos", kind="builtin")

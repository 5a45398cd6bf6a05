"""Score ordering, scalarization, and document round trips."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from harness_evo.canon import canonical_json
from harness_evo.model import (
    IMPROVED,
    MIN_SCORE,
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
    Score,
    Step,
    Task,
    Trace,
    WorkerBinding,
    compare_scores,
    scalarize,
    score_from_doc,
    score_to_doc,
    validate_blueprint,
    validate_harness,
)


@st.composite
def scores(draw):
    d = draw(st.integers(min_value=1, max_value=12))
    n = draw(st.integers(min_value=0, max_value=d))
    t = draw(st.integers(min_value=0, max_value=3000))
    return Score(passed=n == d, criteria_fraction=Fraction(n, d), total_time_ms=t)


score_like = st.one_of(st.just(MIN_SCORE), scores())


def sort_key(s):
    if s is MIN_SCORE:
        return (-1, Fraction(-1), 0)
    return (int(s.passed), s.criteria_fraction, -s.total_time_ms)


@given(score_like, score_like)
def test_compare_matches_tuple_key(a, b):
    ka, kb = sort_key(a), sort_key(b)
    expected = (ka > kb) - (ka < kb)
    assert compare_scores(a, b) == expected
    assert compare_scores(b, a) == -expected


@given(score_like, score_like, score_like)
def test_compare_is_transitive(a, b, c):
    if compare_scores(a, b) >= 0 and compare_scores(b, c) >= 0:
        assert compare_scores(a, c) >= 0


@given(scores())
def test_min_score_below_everything(s):
    assert compare_scores(MIN_SCORE, s) == -1
    assert compare_scores(s, MIN_SCORE) == 1
    assert compare_scores(MIN_SCORE, MIN_SCORE) == 0


def test_score_ordering_cases():
    passed = Score(True, Fraction(1), 900)
    faster = Score(True, Fraction(1), 100)
    partial = Score(False, Fraction(1, 2), 10)
    worse = Score(False, Fraction(1, 4), 10)
    assert compare_scores(faster, passed) == 1  # time breaks ties among passes
    assert compare_scores(passed, partial) == 1  # any pass beats any fail
    assert compare_scores(partial, worse) == 1
    assert compare_scores(partial, Score(False, Fraction(1, 2), 5)) == -1


def test_score_consistency_enforced():
    with pytest.raises(ValueError):
        Score(passed=True, criteria_fraction=Fraction(1, 2), total_time_ms=0)
    with pytest.raises(ValueError):
        Score(passed=False, criteria_fraction=Fraction(1), total_time_ms=0)
    with pytest.raises(ValueError):
        Score(passed=False, criteria_fraction=Fraction(3, 2), total_time_ms=0)
    with pytest.raises(ValueError):
        Score(passed=False, criteria_fraction=Fraction(0), total_time_ms=-1)


def test_scalarize_exact_values():
    budget = 1000
    assert scalarize(MIN_SCORE, budget) == 0
    assert scalarize(Score(False, Fraction(1, 2), 50), budget) == Fraction(9, 20)
    # pass at 400ms of 1000: 0.9 + 0.1 * 0.6
    assert scalarize(Score(True, Fraction(1), 400), budget) == Fraction(24, 25)
    # over budget clamps the bonus at zero
    assert scalarize(Score(True, Fraction(1), 2500), budget) == Fraction(9, 10)
    with pytest.raises(ValueError):
        scalarize(MIN_SCORE, 0)


@given(score_like, score_like, st.integers(min_value=1, max_value=5000))
def test_scalarize_monotone_in_score_order(a, b, budget):
    # order-preserving but not injective: ties can appear past the budget
    if compare_scores(a, b) > 0:
        assert scalarize(a, budget) >= scalarize(b, budget)


@given(scores(), st.integers(min_value=1, max_value=5000))
def test_scalarize_pass_fail_boundary(s, budget):
    v = scalarize(s, budget)
    assert 0 <= v <= 1
    if s.passed:
        assert v >= Fraction(9, 10)
    else:
        assert v < Fraction(9, 10)


def test_score_doc_roundtrip():
    s = Score(False, Fraction(2, 3), 120)
    assert score_from_doc(score_to_doc(s)) == s
    assert score_to_doc(s)["criteria_fraction"] == "2/3"
    assert score_from_doc("MIN_SCORE") is MIN_SCORE
    assert score_to_doc(MIN_SCORE) == "MIN_SCORE"


# ---------------------------------------------------------------------------


def make_harness(**over):
    doc = {
        "prompts": {"system": "be brief"},
        "tools": ["append_a", "append_b"],
        "orchestration": {"planner_depth": 2, "max_steps": 8},
        "model_config": {"model_tier": "fast", "prompt_style": "terse"},
    }
    doc.update(over)
    return Harness.from_doc(doc)


def make_task():
    return Task(
        id="t_demo",
        instructions="produce ab",
        criteria=(
            Criterion("reach_target", "equals_target", {"target": "ab"}),
            Criterion("within_budget", "step_budget", {"max_steps": 4}),
        ),
        environment=EnvironmentSpec(start="", alphabet="ab", max_steps=4),
    )


def test_harness_equality_is_canonical_byte_equality():
    a = make_harness()
    b = Harness.from_doc({k: a.to_doc()[k] for k in sorted(a.to_doc(), reverse=True)})
    assert a == b
    assert hash(a) == hash(b)
    assert a != make_harness(tools=["append_a"])


def test_harness_roundtrip_preserves_extensions():
    h = make_harness(memory={"kind": "scratchpad", "slots": 3})
    doc = h.to_doc()
    assert doc["memory"] == {"kind": "scratchpad", "slots": 3}
    assert Harness.from_doc(doc) == h
    assert canonical_json(Harness.from_doc(doc).to_doc()) == canonical_json(doc)


def test_validate_harness_accepts_good_doc():
    assert validate_harness(make_harness()) == []


@pytest.mark.parametrize(
    "over,path",
    [
        ({"orchestration": {"planner_depth": 0, "max_steps": 8}}, "orchestration.planner_depth"),
        ({"orchestration": {"planner_depth": 4, "max_steps": 8}}, "orchestration.planner_depth"),
        ({"orchestration": {"planner_depth": 2, "max_steps": 0}}, "orchestration.max_steps"),
        ({"orchestration": {"planner_depth": 2}}, "orchestration.max_steps"),
        ({"model_config": {"model_tier": "slow", "prompt_style": "terse"}}, "model_config.model_tier"),
        ({"model_config": {"model_tier": "fast", "prompt_style": "epic"}}, "model_config.prompt_style"),
        ({"tools": []}, "tools"),
        ({"tools": ["append_a", ""]}, "tools[1]"),
    ],
)
def test_validate_harness_flags_bad_field(over, path):
    violations = validate_harness(make_harness(**over))
    assert any(v.path == path for v in violations), violations


def test_validate_harness_empty_tools_ok_for_external_worker():
    h = make_harness(tools=[])
    assert validate_harness(h, for_builtin_worker=False) == []
    assert validate_harness(h, for_builtin_worker=True) != []


def test_task_rejects_empty_or_duplicate_criteria():
    env = EnvironmentSpec(start="", alphabet="ab", max_steps=4)
    with pytest.raises(ValueError):
        Task(id="t", instructions="x", criteria=(), environment=env)
    c = Criterion("c1", "equals_target", {"target": "a"})
    with pytest.raises(ValueError):
        Task(id="t", instructions="x", criteria=(c, c), environment=env)


def test_task_doc_roundtrip():
    t = make_task()
    assert Task.from_doc(t.to_doc()) == t


# ---------------------------------------------------------------------------


def make_trace():
    steps = (
        Step(1, {"tool": "append_a", "args": {}}, "a", 5, 3),
        Step(2, {"tool": "append_b", "args": {}}, "ab", 5, 3),
    )
    return Trace(steps=steps, claimed_final_state="ab", llm_time_ms=10, tool_time_ms=6)


def test_trace_roundtrip():
    tr = make_trace()
    assert Trace.from_doc(tr.to_doc()) == tr


def test_trace_rejects_bad_totals_and_indices():
    steps = (Step(1, {"tool": "append_a", "args": {}}, "a", 5, 3),)
    with pytest.raises(ValueError):
        Trace(steps=steps, claimed_final_state="a", llm_time_ms=99, tool_time_ms=3)
    bad = (Step(2, {"tool": "append_a", "args": {}}, "a", 5, 3),)
    with pytest.raises(ValueError):
        Trace(steps=bad, claimed_final_state="a", llm_time_ms=5, tool_time_ms=3)


def make_report(passed=True, verified=True):
    frac = Fraction(1) if passed else Fraction(1, 2)
    return EvaluationReport(
        criterion_verdicts=(
            CriterionVerdict("reach_target", passed, "final state"),
            CriterionVerdict("within_budget", True, "2 steps of 4"),
        ),
        state_verified=verified,
        first_divergence=None if verified else 1,
        audit=Audit(llm_time_ms=10, tool_time_ms=6, dominant_bottleneck="llm"),
        score=Score(passed and verified, frac if verified else Fraction(1, 3), 16),
    )


def test_report_roundtrip():
    r = make_report()
    assert EvaluationReport.from_doc(r.to_doc()) == r
    assert EvaluationReport.from_doc(make_report(passed=False).to_doc()) == make_report(passed=False)


def test_report_invariants_enforced():
    good = make_report()
    with pytest.raises(ValueError):  # passed score but a failing verdict
        EvaluationReport(
            criterion_verdicts=(CriterionVerdict("c", False, ""),),
            state_verified=True,
            first_divergence=None,
            audit=good.audit,
            score=Score(True, Fraction(1), 16),
        )
    with pytest.raises(ValueError):  # verified but divergence set
        EvaluationReport(
            criterion_verdicts=good.criterion_verdicts,
            state_verified=True,
            first_divergence=2,
            audit=good.audit,
            score=good.score,
        )
    with pytest.raises(ValueError):  # unverified needs a divergence index
        EvaluationReport(
            criterion_verdicts=(CriterionVerdict("c", False, ""),),
            state_verified=False,
            first_divergence=None,
            audit=good.audit,
            score=Score(False, Fraction(0), 16),
        )


def test_history_entry_roundtrip():
    entry = HistoryEntry(iteration=1, harness=make_harness(), report=make_report(), score=make_report().score, verdict=IMPROVED)
    assert HistoryEntry.from_doc(entry.to_doc()) == entry


# ---------------------------------------------------------------------------


def make_blueprint(**over):
    fields = dict(
        worker_binding=WorkerBinding(kind="builtin"),
        initial_harness=make_harness(),
        evaluator_config={"time_budget_ms": 1000, "strictness": 1},
        evolution_strategy=EvolutionStrategy(kind="hill_climb", params={"space": "restricted"}),
        loop=LoopConfig(K=10, parallelism=1),
    )
    fields.update(over)
    return Blueprint(**fields)


def test_blueprint_roundtrip_and_equality():
    bp = make_blueprint()
    assert Blueprint.from_doc(bp.to_doc()) == bp
    assert bp == Blueprint.from_doc(bp.to_doc())
    assert bp != make_blueprint(loop=LoopConfig(K=11))
    assert validate_blueprint(bp) == []


def test_blueprint_early_stop_serialization():
    bp = make_blueprint(loop=LoopConfig(K=5, early_stop="0.95"))
    doc = bp.to_doc()
    assert doc["loop"]["early_stop"] == "0.95"
    assert Blueprint.from_doc(doc).early_stop_threshold() == Fraction(19, 20)
    assert "early_stop" not in make_blueprint().to_doc()["loop"]
    assert make_blueprint().early_stop_threshold() is None


@pytest.mark.parametrize(
    "over,path",
    [
        ({"worker_binding": WorkerBinding(kind="external", command="", timeout_ms=100)}, "worker_binding.command"),
        ({"worker_binding": WorkerBinding(kind="external", command="x", timeout_ms=0)}, "worker_binding.timeout_ms"),
        ({"evaluator_config": {"time_budget_ms": 0}}, "evaluator_config.time_budget_ms"),
        ({"evaluator_config": {}}, "evaluator_config.time_budget_ms"),
        ({"evolution_strategy": EvolutionStrategy(kind="wander")}, "evolution_strategy.kind"),
        ({"evolution_strategy": EvolutionStrategy(kind="external", command="")}, "evolution_strategy.command"),
        ({"loop": LoopConfig(K=-1)}, "loop.K"),
        ({"loop": LoopConfig(K=1, parallelism=0)}, "loop.parallelism"),
        ({"loop": LoopConfig(K=1, early_stop="high")}, "loop.early_stop"),
        ({"initial_harness": make_harness(tools=[])}, "initial_harness.tools"),
    ],
)
def test_validate_blueprint_flags_bad_field(over, path):
    violations = validate_blueprint(make_blueprint(**over))
    assert any(v.path == path for v in violations), violations


def test_external_worker_blueprint_allows_empty_tools():
    bp = make_blueprint(
        worker_binding=WorkerBinding(kind="external", command="./agent", args=("--x",), timeout_ms=500),
        initial_harness=make_harness(tools=[]),
    )
    assert validate_blueprint(bp) == []

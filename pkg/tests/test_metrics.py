"""Metrics: convergence speed, pass rate, robustness, held-out reports."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from score_fixtures import history_of
from harness_evo.canon import fixed6, parse_canonical
from harness_evo.errors import EmptyAggregate, TrainTestOverlap
from harness_evo.inner_loop import InnerRunResult, blueprint_digest, run_inner_loop
from harness_evo.metrics import (
    NOT_REACHED,
    UNDEFINED,
    ConvergenceRecord,
    build_convergence_record,
    convergence_speed,
    final_performance,
    meta_test_report,
    render_report,
    render_series,
    robustness,
)
from harness_evo.model import MIN_SCORE, Score, scalarize
from harness_evo.simkit import (
    HarnessSpace,
    brute_force_best,
    bundled_blueprint,
    bundled_task,
)

BUDGET = 1000


def result_passing(time_ms: int) -> InnerRunResult:
    h = HarnessSpace.restricted().harness_at(0)
    return InnerRunResult(h, Score(True, Fraction(1), time_ms), (), False)


def result_failing(frac) -> InnerRunResult:
    h = HarnessSpace.restricted().harness_at(0)
    return InnerRunResult(h, Score(False, Fraction(frac), 10), (), False)


# ---------------------------------------------------------------------------
# convergence_speed


def test_speed_threshold_zero_is_one():
    history = history_of([(False, Fraction(0), 5)])
    assert convergence_speed(history, Fraction(0), BUDGET) == 1


def test_speed_first_crossing():
    # scalars 0.4, 0.4, 0.92, 0.95
    history = history_of(
        [
            (False, Fraction(4, 9), 10),
            (False, Fraction(4, 9), 10),
            (True, Fraction(1), 800),
            (True, Fraction(1), 500),
        ]
    )
    scalars = [scalarize(e.score, BUDGET) for e in history]
    assert scalars == [Fraction(2, 5), Fraction(2, 5), Fraction(23, 25), Fraction(19, 20)]
    assert convergence_speed(history, Fraction(9, 10), BUDGET) == 3
    assert convergence_speed(history, Fraction(93, 100), BUDGET) == 4
    assert convergence_speed(history, Fraction(2, 5), BUDGET) == 1


def test_speed_empty_history_not_reached():
    assert convergence_speed([], Fraction(0), BUDGET) == NOT_REACHED
    assert convergence_speed([], Fraction(1), BUDGET) == NOT_REACHED


def test_speed_counts_running_best_not_current():
    # a later regression must not undo an earlier crossing
    history = history_of([(True, Fraction(1), 100), (False, Fraction(0), 5)])
    assert convergence_speed(history, Fraction(9, 10), BUDGET) == 1


def test_speed_threshold_validated():
    with pytest.raises(ValueError):
        convergence_speed([], Fraction(11, 10), BUDGET)
    with pytest.raises(ValueError):
        convergence_speed([], Fraction(-1, 10), BUDGET)


@given(
    st.lists(
        st.tuples(st.booleans(), st.fractions(min_value=0, max_value=1), st.integers(0, 2000)),
        max_size=8,
    ),
    st.fractions(min_value=0, max_value=1),
    st.fractions(min_value=0, max_value=1),
)
def test_speed_monotone_in_threshold(specs, t1, t2):
    history = history_of([(f == 1, f, ms) for (_, f, ms) in specs])
    lo, hi = sorted([t1, t2])
    a = convergence_speed(history, lo, BUDGET)
    b = convergence_speed(history, hi, BUDGET)
    inf = len(history) + 1
    assert (inf if a == NOT_REACHED else a) <= (inf if b == NOT_REACHED else b)


# ---------------------------------------------------------------------------
# final_performance


def test_final_performance_examples():
    results = [result_passing(10), result_failing(Fraction(1, 2)), result_passing(20), result_passing(30)]
    assert final_performance(results) == Fraction(3, 4)


def test_final_performance_min_score_never_passes():
    h = HarnessSpace.restricted().harness_at(0)
    results = [InnerRunResult(h, MIN_SCORE, (), False)] * 3
    assert final_performance(results) == Fraction(0)


def test_final_performance_empty_rejected():
    with pytest.raises(EmptyAggregate):
        final_performance([])


def test_final_performance_matches_oracle_pass_fraction():
    tasks = [bundled_task(t) for t in ("T1", "T2", "T12")]
    bp = bundled_blueprint("exhaustive")
    results = [run_inner_loop(t, bp, seed=0) for t in tasks]
    space = HarnessSpace.restricted()
    oracle_passes = [brute_force_best(t, space).score.passed for t in tasks]
    assert final_performance(results) == Fraction(sum(oracle_passes), len(tasks))
    # T12 needs swapcase, which the restricted space lacks
    assert oracle_passes == [True, True, False]


# ---------------------------------------------------------------------------
# robustness


@pytest.mark.parametrize(
    "speeds,variance,missing",
    [
        ([3, 3, 3], Fraction(0), 0),
        ([2, 4], Fraction(1), 0),
        ([2, NOT_REACHED, 4], Fraction(1), 1),
        ([5], Fraction(0), 0),
        ([1, 2, 3, 4], Fraction(5, 4), 0),
    ],
)
def test_robustness_values(speeds, variance, missing):
    assert robustness(speeds) == (variance, missing)


def test_robustness_all_missing_is_undefined():
    assert robustness([NOT_REACHED, NOT_REACHED]) == (UNDEFINED, 2)
    assert robustness([]) == (UNDEFINED, 0)


# ---------------------------------------------------------------------------
# ConvergenceRecord


def test_record_series_is_prefix_max_of_scalars():
    task = bundled_task("T6")
    bp = bundled_blueprint("hill_climb")
    result = run_inner_loop(task, bp, seed=4)
    record = build_convergence_record("T6", result.history, Fraction(9, 10), BUDGET)
    running = Fraction(0)
    expected = []
    for entry in result.history:
        running = max(running, scalarize(entry.score, BUDGET))
        expected.append(running)
    assert list(record.best_scalar_by_iteration) == expected
    assert record.final_pass == any(e.score.passed for e in result.history)


def test_record_rejects_decreasing_series():
    with pytest.raises(ValueError):
        ConvergenceRecord("T1", NOT_REACHED, False, (Fraction(1, 2), Fraction(1, 4)))


def test_record_rejects_out_of_range_iterations():
    with pytest.raises(ValueError):
        ConvergenceRecord("T1", 3, False, (Fraction(0), Fraction(1, 2)))
    with pytest.raises(ValueError):
        ConvergenceRecord("T1", 0, False, (Fraction(0),))


def test_record_round_trips_on_grid_values():
    record = ConvergenceRecord(
        "T9", 2, True, (Fraction(2, 5), Fraction(19, 20), Fraction(19, 20))
    )
    assert ConvergenceRecord.from_doc(record.to_doc()) == record


def test_render_series_two_columns_fixed6():
    record = ConvergenceRecord("T1", 2, True, (Fraction(2, 5), Fraction(19, 20)))
    assert render_series(record) == "1 0.400000\n2 0.950000\n"


# ---------------------------------------------------------------------------
# meta_test_report


def doc_with_provenance(bp, training_ids):
    return {"blueprint": bp.to_doc(), "provenance": {"training_task_ids": training_ids}}


def test_report_on_held_out_tasks_matches_oracles():
    bp = bundled_blueprint("exhaustive")
    tasks = [bundled_task("T11"), bundled_task("T12")]
    report = meta_test_report(bp, tasks, K=84, seed=3, threshold=Fraction(9, 10))
    space = HarnessSpace.restricted()
    oracles = {t.id: brute_force_best(t, space) for t in tasks}
    assert report["metrics"]["final_performance"] == "1/2"
    assert oracles["T11"].score.passed and not oracles["T12"].score.passed
    speeds = report["metrics"]["convergence_speed"]
    # the exhaustive walk reaches the oracle harness at its index + 1
    assert speeds["T11"] == oracles["T11"].index + 1
    assert speeds["T12"] == NOT_REACHED
    assert report["metrics"]["robustness"]["variance"] == "0/1"
    assert report["metrics"]["robustness"]["not_reached_count"] == 1
    assert report["metrics"]["robustness"]["kind"] == "population_variance"
    assert report["provenance"]["test_task_ids"] == ["T11", "T12"]
    assert report["provenance"]["threshold"] == "9/10"
    assert report["provenance"]["blueprint_digest"] == blueprint_digest(bp)
    for rec_doc, task in zip(report["per_task"], tasks):
        assert rec_doc["task_id"] == task.id
        series = rec_doc["best_scalar_by_iteration"]
        assert len(series) == 84
        assert series == sorted(series)  # fixed6 strings sort numerically here


def test_report_regeneration_is_byte_identical():
    bp = bundled_blueprint("hill_climb")
    tasks = [bundled_task("T2"), bundled_task("T5")]
    a = render_report(meta_test_report(bp, tasks, K=10, seed=7, threshold=Fraction(9, 10)))
    b = render_report(meta_test_report(bp, tasks, K=10, seed=7, threshold=Fraction(9, 10)))
    assert a == b
    assert a.endswith("\n")
    parse_canonical(a.strip())


def test_report_parallelism_does_not_change_bytes():
    bp = bundled_blueprint("hill_climb")
    tasks = [bundled_task(t) for t in ("T1", "T2", "T5", "T6")]
    a = render_report(meta_test_report(bp, tasks, K=8, seed=1, threshold=Fraction(9, 10)))
    b = render_report(
        meta_test_report(bp, tasks, K=8, seed=1, threshold=Fraction(9, 10), parallelism=4)
    )
    assert a == b


def test_report_refuses_train_test_overlap():
    bp = bundled_blueprint("hill_climb")
    doc = doc_with_provenance(bp, ["T1", "T2", "T11"])
    with pytest.raises(TrainTestOverlap, match="T11"):
        meta_test_report(doc, [bundled_task("T11"), bundled_task("T12")], 5, 0, Fraction(9, 10))


def test_report_empty_test_set_is_empty_aggregate_not_overlap():
    bp = bundled_blueprint("hill_climb")
    doc = doc_with_provenance(bp, ["T1"])
    with pytest.raises(EmptyAggregate):
        meta_test_report(doc, [], 5, 0, Fraction(9, 10))


def test_report_duplicate_test_ids_rejected():
    bp = bundled_blueprint("hill_climb")
    t = bundled_task("T11")
    with pytest.raises(ValueError, match="duplicate"):
        meta_test_report(bp, [t, t], 5, 0, Fraction(9, 10))


def test_report_training_ids_recorded_and_sorted():
    bp = bundled_blueprint("hill_climb")
    doc = doc_with_provenance(bp, ["T2", "T1"])
    report = meta_test_report(doc, [bundled_task("T11")], 5, 0, Fraction(9, 10))
    assert report["provenance"]["training_task_ids"] == ["T1", "T2"]

"""Frozen byte-level fixtures guarding the wire and artifact formats.

If one of these fails after an intentional format change, regenerate the
files under tests/golden/ with the engine and review the diff by hand.
"""

from __future__ import annotations

from io import StringIO
from pathlib import Path

from harness_evo.canon import canonical_json, parse_canonical
from harness_evo.inner_loop import run_inner_loop
from harness_evo.model import Blueprint, LoopConfig
from harness_evo.simkit import HarnessSpace, brute_force_best, bundled_blueprint, bundled_task

GOLDEN = Path(__file__).with_name("golden")


def test_oracle_doc_bytes_are_stable():
    best = brute_force_best(bundled_task("T1"), HarnessSpace.restricted())
    doc = {
        "results": [
            {
                "harness": best.harness.to_doc(),
                "index": best.index,
                "score": best.score.to_doc(),
                "task_id": "T1",
            }
        ],
        "space": "restricted",
    }
    frozen = (GOLDEN / "oracle_T1.json").read_text(encoding="utf-8")
    assert canonical_json(doc) + "\n" == frozen


def test_inner_run_log_bytes_are_stable():
    bp = bundled_blueprint("hill_climb")
    bp = Blueprint(
        worker_binding=bp.worker_binding,
        initial_harness=bp.initial_harness,
        evaluator_config=bp.evaluator_config,
        evolution_strategy=bp.evolution_strategy,
        loop=LoopConfig(K=10, early_stop=bp.loop.early_stop),
    )
    sink = StringIO()
    result = run_inner_loop(bundled_task("T1"), bp, seed=5, log=sink)
    frozen = (GOLDEN / "inner_T1_seed5.log").read_text(encoding="utf-8")
    assert sink.getvalue() == frozen
    frozen_result = parse_canonical(
        (GOLDEN / "inner_T1_seed5_result.json").read_text(encoding="utf-8").strip()
    )
    assert canonical_json(result.to_doc()) == canonical_json(frozen_result)


def test_golden_log_header_names_the_engine_version():
    import harness_evo

    header = parse_canonical(
        (GOLDEN / "inner_T1_seed5.log").read_text(encoding="utf-8").splitlines()[0]
    )
    assert header["engine_version"] == harness_evo.__version__
    assert header["task_id"] == "T1"
    assert header["seed"] == 5

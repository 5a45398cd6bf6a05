#!/usr/bin/env python3
"""End-to-end meta search: sweep a blueprint grid on training tasks, then
score the winner on held-out tasks."""

import argparse
from fractions import Fraction

from harness_evo.canon import canonical_json, fixed6
from harness_evo.meta_loop import run_meta_loop
from harness_evo.metrics import meta_test_report
from harness_evo.protocol import AgentBinding
from harness_evo.simkit import bundled_blueprint, bundled_task, default_meta_space

TRAIN = ("T1", "T2", "T6", "T7")
TEST = ("T8", "T11")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("-J", "--rounds", type=int, default=10)
    parser.add_argument("--meta-strategy", default="hill_climb",
                        choices=("hill_climb", "random", "exhaustive"))
    args = parser.parse_args(argv)

    train = [bundled_task(t) for t in TRAIN]
    space = default_meta_space()
    binding = AgentBinding(role="meta_evolution", kind="builtin", name=args.meta_strategy)
    result = run_meta_loop(train, binding, bundled_blueprint("hill_climb"),
                           rounds=args.rounds, seed=args.seed, meta_space=space)

    print(f"meta search: {args.meta_strategy}, J={args.rounds}, seed={args.seed}")
    for entry in result.meta_history:
        kind = entry.blueprint.evolution_strategy.kind
        print(f"  round {entry.round:>2}  {kind:<11} K={entry.blueprint.loop.K:<3}"
              f" aggregate={fixed6(entry.meta_score)}  {entry.verdict}")
    best = result.best_blueprint
    print(f"best: {best.evolution_strategy.kind} K={best.loop.K}"
          f" aggregate={fixed6(result.best_meta_score)}")

    report = meta_test_report(
        best,
        [bundled_task(t) for t in TEST],
        K=best.loop.K,
        seed=args.seed,
        threshold=Fraction(9, 10),
    )
    print("held-out report:")
    print(canonical_json(report["metrics"]))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

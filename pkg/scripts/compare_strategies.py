#!/usr/bin/env python3
"""Directed vs undirected search: convergence speed over the bundled corpus.

For each seed, both strategies run on every bundled task with matched
per-task seeds. A run that never crosses the threshold counts as K+1, so
slow strategies are penalized but remain comparable.
"""

import argparse
import statistics
from fractions import Fraction

from harness_evo.canon import derive_seed
from harness_evo.inner_loop import run_inner_loop
from harness_evo.metrics import NOT_REACHED, convergence_speed
from harness_evo.simkit import bundled_blueprint, bundled_task, bundled_task_ids


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=20, help="number of matched seeds")
    parser.add_argument("--threshold", default="0.9", help="scalar threshold in [0, 1]")
    args = parser.parse_args(argv)

    threshold = Fraction(args.threshold)
    corpus = [bundled_task(t) for t in bundled_task_ids()]
    blueprints = {k: bundled_blueprint(k) for k in ("hill_climb", "random")}
    budget = int(blueprints["hill_climb"].evaluator_config["time_budget_ms"])
    cap = blueprints["hill_climb"].loop.K + 1

    wins = 0
    print(f"{'seed':>4}  {'hill_climb':>10}  {'random':>10}")
    for seed in range(args.seeds):
        means = {}
        for kind, bp in blueprints.items():
            speeds = []
            for task in corpus:
                history = run_inner_loop(task, bp, seed=derive_seed(seed, task.id)).history
                speed = convergence_speed(history, threshold, budget)
                speeds.append(cap if speed == NOT_REACHED else speed)
            means[kind] = statistics.mean(speeds)
        marker = "<" if means["hill_climb"] < means["random"] else " "
        wins += marker == "<"
        print(f"{seed:>4}  {means['hill_climb']:>10.2f}  {means['random']:>10.2f}  {marker}")
    print(f"hill_climb converged faster on {wins}/{args.seeds} seeds")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

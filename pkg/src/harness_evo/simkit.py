"""Deterministic simulation kit: environment, worker, evaluator, spaces, strategies.

The environment is a single string rewritten by five tools. The builtin worker
is a greedy receding-horizon planner: it enumerates tool sequences up to its
lookahead depth, picks the one whose simulated endpoint is closest to the
target in edit distance, executes only the first action, and replans. Model
tier gates the depth (the fast tier always plans one step ahead), and every
cost is a fixed integer, so identical inputs produce identical traces down to
the millisecond.

The same module defines the finite harness spaces the builtin evolution
strategies search, a small task corpus, and a brute-force oracle that scores
an entire space. The oracle is the reference answer the search strategies are
tested against.
"""

from __future__ import annotations

import importlib.resources
import itertools
import json
import random
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Any, Iterator, Mapping, Sequence

from .errors import HarnessInvalid, TraceInvalid
from .model import (
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
    Trace,
    WorkerBinding,
    compare_scores,
)

# ---------------------------------------------------------------------------
# Environment

TOOL_UNIVERSE = ("append_a", "append_b", "drop_last", "reverse", "swapcase")

TOOL_TIME_MS = 3
LLM_TIME_MS = {"fast": 5, "smart": 20}
VERBOSE_EXTRA_MS = 2

SPACE_PROMPTS = {"system": "You operate a string workspace. Reach the target string, then stop."}
SPACE_MAX_STEPS = 16


def apply_tool(tool: str, state: str) -> str:
    if tool == "append_a":
        return state + "a"
    if tool == "append_b":
        return state + "b"
    if tool == "drop_last":
        return state[:-1]
    if tool == "reverse":
        return state[::-1]
    if tool == "swapcase":
        return state.swapcase()
    raise HarnessInvalid(f"unknown tool {tool!r}")


class StringForgeEnv:
    """Mutable cursor over the string workspace; transitions are pure."""

    def __init__(self, task: Task) -> None:
        self.task = task
        self.tool_table = {name: (lambda s, t=name: apply_tool(t, s), TOOL_TIME_MS) for name in TOOL_UNIVERSE}
        self.current = task.environment.start
        self.steps_used = 0

    def reset(self) -> None:
        self.current = self.task.environment.start
        self.steps_used = 0

    def step(self, tool: str) -> str:
        self.current = apply_tool(tool, self.current)
        self.steps_used += 1
        return self.current


@lru_cache(maxsize=None)
def levenshtein(a: str, b: str) -> int:
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def plan_next_tool(state: str, target: str, tools: Sequence[str], depth: int) -> str:
    """First action of the lowest-distance tool sequence of length <= depth.

    Ties break on the sequence name tuple, so planning is order-insensitive in
    the harness's tool list and fully deterministic.
    """
    names = sorted(tools)
    best: tuple[int, tuple[str, ...]] | None = None
    for length in range(1, depth + 1):
        for seq in itertools.product(names, repeat=length):
            result = state
            for tool in seq:
                result = apply_tool(tool, result)
            key = (levenshtein(result, target), seq)
            if best is None or key < best:
                best = key
    assert best is not None  # tools is nonempty, checked by the caller
    return best[1][0]


def task_target(task: Task) -> str | None:
    for criterion in task.criteria:
        if criterion.kind == "equals_target":
            return str(criterion.params["target"])
    return None


def sim_execute(harness: Harness, task: Task) -> Trace:
    """Run the planner worker; the trace records real observations."""
    for tool in harness.tools:
        if tool not in TOOL_UNIVERSE:
            raise HarnessInvalid(f"builtin worker has no tool {tool!r}")
    if not harness.tools:
        raise HarnessInvalid("builtin worker needs at least one tool")

    tier = str(harness.model_config["model_tier"])
    depth = int(harness.orchestration["planner_depth"]) if tier == "smart" else 1
    llm_ms = LLM_TIME_MS[tier] + (VERBOSE_EXTRA_MS if harness.model_config["prompt_style"] == "verbose" else 0)
    step_cap = min(int(harness.orchestration["max_steps"]), task.environment.max_steps)

    target = task_target(task)
    env = StringForgeEnv(task)
    env.reset()
    steps: list[Step] = []
    if target is not None:
        while env.current != target and env.steps_used < step_cap:
            tool = plan_next_tool(env.current, target, harness.tools, depth)
            observation = env.step(tool)
            steps.append(
                Step(
                    index=env.steps_used,
                    action={"args": {}, "tool": tool},
                    observation=observation,
                    llm_time_ms=llm_ms,
                    tool_time_ms=TOOL_TIME_MS,
                )
            )
    return Trace(
        steps=tuple(steps),
        claimed_final_state=env.current,
        llm_time_ms=llm_ms * len(steps),
        tool_time_ms=TOOL_TIME_MS * len(steps),
    )


def sim_evaluate(trace: Trace, task: Task, config: Mapping[str, Any] | None = None) -> EvaluationReport:
    """Replay the trace against the environment, then judge the criteria.

    Verification replays every action from the task's start state; the first
    observation that disagrees with the replay is the divergence point, and a
    trace whose steps all check out but whose claimed final state does not is
    flagged one past the last step. Criteria are judged on the replayed state,
    never the claimed one. A failed verification counts as one extra failed
    check, so the fraction of an unverifiable trace stays below 1.
    """
    del config  # time budget enters through scalarization; nothing here reads it
    env = StringForgeEnv(task)
    env.reset()
    first_divergence: int | None = None
    for step in trace.steps:
        tool = step.action.get("tool", "")
        if tool not in TOOL_UNIVERSE:
            raise TraceInvalid(f"step {step.index}: cannot replay unknown tool {tool!r}")
        env.step(tool)
        if first_divergence is None and step.observation != env.current:
            first_divergence = step.index
    state = env.current
    if first_divergence is None and trace.claimed_final_state != state:
        first_divergence = len(trace.steps) + 1
    state_verified = first_divergence is None

    verdicts: list[CriterionVerdict] = []
    for criterion in task.criteria:
        if criterion.kind == "equals_target":
            target = str(criterion.params["target"])
            ok = state == target
            evidence = f"replayed final state {state!r} vs target {target!r}"
        elif criterion.kind == "step_budget":
            budget = int(criterion.params["max_steps"])
            ok = len(trace.steps) <= budget
            evidence = f"{len(trace.steps)} steps of {budget} allowed"
        else:
            raise ValueError(f"builtin evaluator cannot judge criterion kind {criterion.kind!r}")
        verdicts.append(CriterionVerdict(criterion_id=criterion.id, passed=ok, evidence=evidence))

    passes = sum(v.passed for v in verdicts)
    m = len(verdicts)
    fraction = Fraction(passes, m) if state_verified else Fraction(passes, m + 1)
    total_ms = trace.llm_time_ms + trace.tool_time_ms
    return EvaluationReport(
        criterion_verdicts=tuple(verdicts),
        state_verified=state_verified,
        first_divergence=first_divergence,
        audit=Audit(
            llm_time_ms=trace.llm_time_ms,
            tool_time_ms=trace.tool_time_ms,
            dominant_bottleneck="llm" if trace.llm_time_ms >= trace.tool_time_ms else "tool",
        ),
        score=Score(
            passed=state_verified and passes == m,
            criteria_fraction=fraction,
            total_time_ms=total_ms,
        ),
    )


# ---------------------------------------------------------------------------
# Harness space

PLANNER_DEPTHS = (1, 2, 3)
MODEL_TIERS = ("fast", "smart")
PROMPT_STYLES = ("terse", "verbose")


class HarnessSpace:
    """Finite enumeration of planner harnesses over a tool universe.

    Index order: tool subset bitmask ascending (bit i is universe[i], zero
    excluded), then planner depth, then model tier, then prompt style. The
    restricted three-tool space has 7 * 3 * 2 * 2 = 84 points.
    """

    def __init__(self, universe: Sequence[str]) -> None:
        if not universe:
            raise ValueError("tool universe must be nonempty")
        for tool in universe:
            if tool not in TOOL_UNIVERSE:
                raise ValueError(f"unknown tool {tool!r}")
        if len(set(universe)) != len(universe):
            raise ValueError(f"duplicate tools in {universe!r}")
        self.universe = tuple(t for t in TOOL_UNIVERSE if t in set(universe))
        self._harnesses = [self._build(i) for i in range(len(self))]
        self._index = {h.canonical(): i for i, h in enumerate(self._harnesses)}

    @classmethod
    def restricted(cls) -> "HarnessSpace":
        return cls(TOOL_UNIVERSE[:3])

    @classmethod
    def full(cls) -> "HarnessSpace":
        return cls(TOOL_UNIVERSE)

    @classmethod
    def from_name(cls, name: str) -> "HarnessSpace":
        if name == "restricted":
            return cls.restricted()
        if name == "full":
            return cls.full()
        return cls(tuple(part.strip() for part in name.split(",") if part.strip()))

    def __len__(self) -> int:
        return (2 ** len(self.universe) - 1) * len(PLANNER_DEPTHS) * len(MODEL_TIERS) * len(PROMPT_STYLES)

    def __iter__(self) -> Iterator[Harness]:
        return iter(self._harnesses)

    def _build(self, index: int) -> Harness:
        per_mask = len(PLANNER_DEPTHS) * len(MODEL_TIERS) * len(PROMPT_STYLES)
        mask = index // per_mask + 1
        rest = index % per_mask
        depth = PLANNER_DEPTHS[rest // (len(MODEL_TIERS) * len(PROMPT_STYLES))]
        rest %= len(MODEL_TIERS) * len(PROMPT_STYLES)
        tier = MODEL_TIERS[rest // len(PROMPT_STYLES)]
        style = PROMPT_STYLES[rest % len(PROMPT_STYLES)]
        return self.assemble(mask, depth, tier, style)

    def assemble(self, mask: int, depth: int, tier: str, style: str) -> Harness:
        tools = tuple(t for i, t in enumerate(self.universe) if mask >> i & 1)
        return Harness(
            prompts=dict(SPACE_PROMPTS),
            tools=tools,
            orchestration={"max_steps": SPACE_MAX_STEPS, "planner_depth": depth},
            model_config={"model_tier": tier, "prompt_style": style},
        )

    def harness_at(self, index: int) -> Harness:
        return self._harnesses[index]

    def index_of(self, harness: Harness) -> int | None:
        return self._index.get(harness.canonical())

    def __contains__(self, harness: Harness) -> bool:
        return harness.canonical() in self._index

    def mask_of(self, harness: Harness) -> int:
        return sum(1 << i for i, t in enumerate(self.universe) if t in set(harness.tools))

    def coordinates(self, harness: Harness) -> tuple[int, int, str, str]:
        return (
            self.mask_of(harness),
            int(harness.orchestration["planner_depth"]),
            str(harness.model_config["model_tier"]),
            str(harness.model_config["prompt_style"]),
        )


def space_from_params(params: Mapping[str, Any]) -> HarnessSpace:
    return HarnessSpace.from_name(str(params.get("space", "restricted")))


# ---------------------------------------------------------------------------
# Builtin evolution strategies

# Single-field mutation rotation for the hill climber. The cursor advances one
# field per consecutive regression, so a stuck climb sweeps all four fields
# before the enumeration fallback kicks in.
_HC_FIELDS = ("tools", "depth", "tier", "style")


def _seen_set(history: Sequence[HistoryEntry]) -> set[str]:
    return {entry.harness.canonical() for entry in history}


def _first_unseen(space: HarnessSpace, seen: set[str]) -> Harness | None:
    for harness in space:
        if harness.canonical() not in seen:
            return harness
    return None


def evolve_exhaustive(
    best: Harness, history: Sequence[HistoryEntry], seed: int, space: HarnessSpace
) -> Harness | None:
    del best, seed
    return _first_unseen(space, _seen_set(history))


def evolve_random(best: Harness, history: Sequence[HistoryEntry], seed: int, space: HarnessSpace) -> Harness | None:
    del best
    seen = _seen_set(history)
    unseen = [h for h in space if h.canonical() not in seen]
    if not unseen:
        return None
    return unseen[random.Random(seed).randrange(len(unseen))]


def _hill_climb_candidates(space: HarnessSpace, best: Harness, field: str) -> list[Harness]:
    mask, depth, tier, style = space.coordinates(best)
    out: list[Harness] = []
    if field == "tools":
        for m in (mask + 1, mask - 1):
            if 1 <= m <= 2 ** len(space.universe) - 1:
                out.append(space.assemble(m, depth, tier, style))
    elif field == "depth":
        for d in (depth + 1, depth - 1):
            if PLANNER_DEPTHS[0] <= d <= PLANNER_DEPTHS[-1]:
                out.append(space.assemble(mask, d, tier, style))
    elif field == "tier":
        out.append(space.assemble(mask, depth, "smart" if tier == "fast" else "fast", style))
    elif field == "style":
        out.append(space.assemble(mask, depth, tier, "verbose" if style == "terse" else "terse"))
    return out


def evolve_hill_climb(
    best: Harness, history: Sequence[HistoryEntry], seed: int, space: HarnessSpace
) -> Harness | None:
    """Single-field neighbor of the best harness, never repeating history.

    The mutated field starts at the count of trailing regressions, so each
    fruitless attempt rotates attention to the next field. When every neighbor
    of the best point is already tried, falls back to the first unexplored
    point of the enumeration; returns None once the space is exhausted.
    """
    del seed  # the climb is fully determined by best and history
    seen = _seen_set(history)
    if best not in space:
        return _first_unseen(space, seen)
    stuck = 0
    for entry in reversed(history):
        if entry.verdict != REGRESSED:
            break
        stuck += 1
    for offset in range(len(_HC_FIELDS)):
        field = _HC_FIELDS[(stuck + offset) % len(_HC_FIELDS)]
        for candidate in _hill_climb_candidates(space, best, field):
            if candidate.canonical() not in seen:
                return candidate
    return _first_unseen(space, seen)


BUILTIN_STRATEGIES = {
    "exhaustive": evolve_exhaustive,
    "random": evolve_random,
    "hill_climb": evolve_hill_climb,
}


def builtin_evolve(
    kind: str,
    best: Harness,
    history: Sequence[HistoryEntry],
    seed: int,
    params: Mapping[str, Any],
) -> Harness | None:
    return BUILTIN_STRATEGIES[kind](best, history, seed, space_from_params(params))


def shortest_tool_path(start: str, target: str, tools: Sequence[str], max_steps: int) -> list[str] | None:
    """Breadth-first shortest action sequence, independent of the planner.

    Ground truth for reachability: the greedy worker can fail on tasks this
    finds solutions for. Ties break by sorted tool name at each expansion.
    """
    if start == target:
        return []
    cap = max(len(start), len(target)) + max_steps  # states can't usefully grow past this
    seen = {start}
    frontier: deque[tuple[str, list[str]]] = deque([(start, [])])
    while frontier:
        state, path = frontier.popleft()
        if len(path) >= max_steps:
            continue
        for tool in sorted(tools):
            nxt = apply_tool(tool, state)
            if nxt == target:
                return path + [tool]
            if nxt not in seen and len(nxt) <= cap:
                seen.add(nxt)
                frontier.append((nxt, path + [tool]))
    return None


# ---------------------------------------------------------------------------
# Brute-force oracle


@dataclass(frozen=True)
class OracleResult:
    index: int
    harness: Harness
    score: Score


def brute_force_best(task: Task, space: HarnessSpace) -> OracleResult:
    """Evaluate every point of the space; earliest index wins ties exactly."""
    best: OracleResult | None = None
    for index, harness in enumerate(space):
        report = sim_evaluate(sim_execute(harness, task), task)
        if best is None or compare_scores(report.score, best.score) > 0:
            best = OracleResult(index=index, harness=harness, score=report.score)
    assert best is not None
    return best


# ---------------------------------------------------------------------------
# Task corpus


def synthesize_instructions(start: str, target: str, max_steps: int) -> str:
    return (
        f"Rewrite the working string from {start!r} to {target!r}"
        f" with the available tools, in at most {max_steps} steps."
    )


def task_from_file_doc(doc: Mapping[str, Any]) -> Task:
    """Load the flat on-disk task form and cross-check its wiring.

    The file carries the target twice (top level and inside the equals_target
    criterion); the two must agree. Instructions are synthesized, never stored.
    """
    criteria = tuple(Criterion.from_doc(c) for c in doc["criteria"])
    task = Task(
        id=doc["id"],
        instructions=synthesize_instructions(doc["start"], doc["target"], doc["max_steps"]),
        criteria=criteria,
        environment=EnvironmentSpec(
            start=doc["start"], alphabet=doc["alphabet"], max_steps=doc["max_steps"]
        ),
    )
    target = task_target(task)
    if target != doc["target"]:
        raise ValueError(f"task {task.id}: top-level target {doc['target']!r} != criterion target {target!r}")
    for ch in set(task.environment.start.lower()) | set(doc["target"].lower()):
        if ch not in task.environment.alphabet:
            raise ValueError(f"task {task.id}: state character {ch!r} outside alphabet")
    return task


def task_to_file_doc(task: Task) -> dict[str, Any]:
    target = task_target(task)
    if target is None:
        raise ValueError(f"task {task.id}: file form requires an equals_target criterion")
    return {
        "alphabet": task.environment.alphabet,
        "criteria": [c.to_doc() for c in task.criteria],
        "id": task.id,
        "max_steps": task.environment.max_steps,
        "start": task.environment.start,
        "target": target,
    }


def load_task(path: str | Path) -> Task:
    return task_from_file_doc(json.loads(Path(path).read_text()))


def bundled_task(task_id: str) -> Task:
    resource = importlib.resources.files("harness_evo") / "tasks" / f"{task_id}.json"
    return task_from_file_doc(json.loads(resource.read_text()))


def bundled_task_ids() -> list[str]:
    folder = importlib.resources.files("harness_evo") / "tasks"
    names = sorted(p.name[: -len(".json")] for p in folder.iterdir() if p.name.endswith(".json"))
    return sorted(names, key=lambda n: (len(n), n))  # T2 before T10


def bundled_tasks() -> list[Task]:
    return [bundled_task(task_id) for task_id in bundled_task_ids()]


def make_task(task_id: str, start: str, target: str, budget: int) -> Task:
    return Task(
        id=task_id,
        instructions=synthesize_instructions(start, target, budget),
        criteria=(
            Criterion("reach_target", "equals_target", {"target": target}),
            Criterion("within_budget", "step_budget", {"max_steps": budget}),
        ),
        environment=EnvironmentSpec(start=start, alphabet="ab", max_steps=budget),
    )


def generate_task(seed: int) -> Task:
    """Random but reproducible task over the two-letter alphabet.

    The step budget is the true shortest tool path plus one to three steps of
    slack, so every generated task is solvable by construction (though not
    necessarily by the greedy planner).
    """
    rng = random.Random(seed)
    start = "".join(rng.choice("ab") for _ in range(rng.randrange(0, 4)))
    target = start
    while target == start:
        target = "".join(rng.choice("ab") for _ in range(rng.randrange(1, 5)))
    path = shortest_tool_path(start, target, TOOL_UNIVERSE, 12)
    assert path is not None  # drop-all plus append-all always fits in 12
    budget = len(path) + rng.randrange(1, 4)
    return make_task(f"G{seed}", start, target, budget)


# ---------------------------------------------------------------------------
# Bundled blueprints

# Starting point for the searches: two of the three restricted tools, decent
# depth. One bit short of the full toolset, so a climb can fix it in one move
# while undirected search has to stumble on it.
DEFAULT_START = {"mask": 6, "depth": 2, "tier": "smart", "style": "terse"}


def bundled_blueprint(kind: str, space: str = "restricted") -> Blueprint:
    sp = HarnessSpace.from_name(space)
    if kind == "exhaustive":
        initial = sp.harness_at(0)
        k = len(sp)
    elif kind in ("hill_climb", "random"):
        initial = sp.assemble(
            DEFAULT_START["mask"], DEFAULT_START["depth"], DEFAULT_START["tier"], DEFAULT_START["style"]
        )
        k = 30
    else:
        raise ValueError(f"no bundled blueprint for strategy {kind!r}")
    return Blueprint(
        worker_binding=WorkerBinding(kind="builtin"),
        initial_harness=initial,
        evaluator_config={"strictness": 1, "time_budget_ms": 1000},
        evolution_strategy=EvolutionStrategy(kind=kind, params={"space": space}),
        loop=LoopConfig(K=k, parallelism=1),
    )


# ---------------------------------------------------------------------------
# Meta space and builtin meta strategies


class MetaSpace:
    """Finite blueprint grid: initial harness x strategy kind x params x K.

    Enumeration nests in that field order. All blueprints share the base
    blueprint's worker binding, evaluator config, and loop extras.
    """

    _AXES = ("initial_harness", "kind", "params", "K")

    def __init__(
        self,
        base: Blueprint,
        initial_harnesses: Sequence[Harness],
        kinds: Sequence[str],
        params_choices: Sequence[Mapping[str, Any]],
        k_values: Sequence[int],
    ) -> None:
        if not (initial_harnesses and kinds and params_choices and k_values):
            raise ValueError("every meta axis needs at least one choice")
        self.base = base
        self.axes: dict[str, tuple[Any, ...]] = {
            "initial_harness": tuple(initial_harnesses),
            "kind": tuple(kinds),
            "params": tuple(dict(p) for p in params_choices),
            "K": tuple(k_values),
        }
        self._blueprints = [
            self._assemble(h, kind, params, k)
            for h in self.axes["initial_harness"]
            for kind in self.axes["kind"]
            for params in self.axes["params"]
            for k in self.axes["K"]
        ]
        self._index = {bp.canonical(): i for i, bp in enumerate(self._blueprints)}

    def _assemble(self, harness: Harness, kind: str, params: Mapping[str, Any], k: int) -> Blueprint:
        return Blueprint(
            worker_binding=self.base.worker_binding,
            initial_harness=harness,
            evaluator_config=self.base.evaluator_config,
            evolution_strategy=EvolutionStrategy(kind=kind, params=dict(params)),
            loop=LoopConfig(
                K=k, parallelism=self.base.loop.parallelism, early_stop=self.base.loop.early_stop
            ),
        )

    def __len__(self) -> int:
        return len(self._blueprints)

    def __iter__(self) -> Iterator[Blueprint]:
        return iter(self._blueprints)

    def blueprint_at(self, index: int) -> Blueprint:
        return self._blueprints[index]

    def index_of(self, blueprint: Blueprint) -> int | None:
        return self._index.get(blueprint.canonical())

    def __contains__(self, blueprint: Blueprint) -> bool:
        return blueprint.canonical() in self._index

    def axis_coordinates(self, blueprint: Blueprint) -> dict[str, int] | None:
        """Position of the blueprint along each axis, None if off-grid."""
        coords: dict[str, int] = {}
        values = {
            "initial_harness": blueprint.initial_harness,
            "kind": blueprint.evolution_strategy.kind,
            "params": dict(blueprint.evolution_strategy.params),
            "K": blueprint.loop.K,
        }
        for axis in self._AXES:
            choices = self.axes[axis]
            try:
                coords[axis] = choices.index(values[axis])
            except ValueError:
                return None
        return coords


def _meta_seen(meta_history: Sequence[MetaHistoryEntry]) -> set[str]:
    return {entry.blueprint.canonical() for entry in meta_history}


def _meta_first_unseen(space: MetaSpace, seen: set[str]) -> Blueprint | None:
    for blueprint in space:
        if blueprint.canonical() not in seen:
            return blueprint
    return None


def meta_evolve_exhaustive(
    best: Blueprint, meta_history: Sequence[MetaHistoryEntry], seed: int, space: MetaSpace
) -> Blueprint | None:
    del best, seed
    return _meta_first_unseen(space, _meta_seen(meta_history))


def meta_evolve_random(
    best: Blueprint, meta_history: Sequence[MetaHistoryEntry], seed: int, space: MetaSpace
) -> Blueprint | None:
    del best
    seen = _meta_seen(meta_history)
    unseen = [bp for bp in space if bp.canonical() not in seen]
    if not unseen:
        return None
    return unseen[random.Random(seed).randrange(len(unseen))]


def meta_evolve_hill_climb(
    best: Blueprint, meta_history: Sequence[MetaHistoryEntry], seed: int, space: MetaSpace
) -> Blueprint | None:
    """Single-axis neighbor of the best blueprint, mirroring the inner climber."""
    del seed
    seen = _meta_seen(meta_history)
    coords = space.axis_coordinates(best)
    if coords is None:
        return _meta_first_unseen(space, seen)
    stuck = 0
    for entry in reversed(meta_history):
        if entry.verdict != REGRESSED:
            break
        stuck += 1
    axes = MetaSpace._AXES
    for offset in range(len(axes)):
        axis = axes[(stuck + offset) % len(axes)]
        choices = space.axes[axis]
        for delta in (1, -1):
            pos = coords[axis] + delta
            if not 0 <= pos < len(choices):
                continue
            moved = dict(coords)
            moved[axis] = pos
            candidate = space._assemble(
                space.axes["initial_harness"][moved["initial_harness"]],
                space.axes["kind"][moved["kind"]],
                space.axes["params"][moved["params"]],
                space.axes["K"][moved["K"]],
            )
            if candidate.canonical() not in seen:
                return candidate
    return _meta_first_unseen(space, seen)


BUILTIN_META_STRATEGIES = {
    "exhaustive": meta_evolve_exhaustive,
    "random": meta_evolve_random,
    "hill_climb": meta_evolve_hill_climb,
}


def default_meta_space(space_name: str = "restricted") -> MetaSpace:
    """Small blueprint grid around the bundled hill-climb blueprint."""
    sp = HarnessSpace.from_name(space_name)
    base = bundled_blueprint("hill_climb", space_name)
    starts = [
        sp.assemble(DEFAULT_START["mask"], DEFAULT_START["depth"], DEFAULT_START["tier"], DEFAULT_START["style"]),
        sp.harness_at(0),
        sp.assemble(2 ** len(sp.universe) - 1, 1, "fast", "terse"),
    ]
    return MetaSpace(
        base=base,
        initial_harnesses=starts,
        kinds=("hill_climb", "random", "exhaustive"),
        params_choices=({"space": space_name},),
        k_values=(10, 20, 30),
    )

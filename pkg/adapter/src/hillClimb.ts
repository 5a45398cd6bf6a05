/**
 * Hill climber over the harness grid, move-for-move equal to the engine's
 * builtin strategy.
 *
 * One field of the best harness is mutated per proposal. The field cursor
 * starts at the count of trailing regressions, so every fruitless round
 * shifts attention to the next field; tools move by bitmask +-1 (up first),
 * depth by +-1 within range, tier and style flip. Anything already in the
 * history is skipped, and when every neighbor of the best point is used up
 * the climber falls back to the first unexplored point of the enumeration.
 * A null return means the whole space has been tried.
 */

import { HarnessSpace, harnessKey, PLANNER_DEPTHS, type HarnessDoc } from "./space.js";

export interface HistoryEntryDoc {
  harness: HarnessDoc;
  verdict: string;
  [key: string]: unknown;
}

const FIELDS = ["tools", "depth", "tier", "style"] as const;

function seenSet(history: readonly HistoryEntryDoc[]): Set<string> {
  return new Set(history.map((entry) => harnessKey(entry.harness)));
}

function firstUnseen(space: HarnessSpace, seen: Set<string>): HarnessDoc | null {
  for (const doc of space.all()) {
    if (!seen.has(harnessKey(doc))) return doc;
  }
  return null;
}

function candidates(space: HarnessSpace, best: HarnessDoc, field: string): HarnessDoc[] {
  const [mask, depth, tier, style] = space.coordinates(best);
  const out: HarnessDoc[] = [];
  if (field === "tools") {
    const top = 2 ** space.universe.length - 1;
    for (const m of [mask + 1, mask - 1]) {
      if (m >= 1 && m <= top) out.push(space.assemble(m, depth, tier, style));
    }
  } else if (field === "depth") {
    const lo = PLANNER_DEPTHS[0];
    const hi = PLANNER_DEPTHS[PLANNER_DEPTHS.length - 1];
    for (const d of [depth + 1, depth - 1]) {
      if (d >= lo && d <= hi) out.push(space.assemble(mask, d, tier, style));
    }
  } else if (field === "tier") {
    out.push(space.assemble(mask, depth, tier === "fast" ? "smart" : "fast", style));
  } else if (field === "style") {
    out.push(space.assemble(mask, depth, tier, style === "terse" ? "verbose" : "terse"));
  }
  return out;
}

export function evolveHillClimb(
  best: HarnessDoc,
  history: readonly HistoryEntryDoc[],
  space: HarnessSpace,
): HarnessDoc | null {
  const seen = seenSet(history);
  if (!space.contains(best)) {
    return firstUnseen(space, seen);
  }
  let stuck = 0;
  for (let i = history.length - 1; i >= 0; i--) {
    if (history[i].verdict !== "REGRESSED") break;
    stuck += 1;
  }
  for (let offset = 0; offset < FIELDS.length; offset++) {
    const field = FIELDS[(stuck + offset) % FIELDS.length];
    for (const candidate of candidates(space, best, field)) {
      if (!seen.has(harnessKey(candidate))) return candidate;
    }
  }
  return firstUnseen(space, seen);
}

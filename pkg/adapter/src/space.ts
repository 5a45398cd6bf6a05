/**
 * The finite harness grid the engine searches: tool subset x planner depth x
 * model tier x prompt style. Field values, enumeration order, and the
 * harness document shape must stay in lockstep with the engine; the
 * equivalence tests on the engine side hold this file to byte-for-byte
 * agreement.
 */

import { canonicalJson, type JsonValue } from "./canon.js";

export const TOOL_UNIVERSE = [
  "append_a",
  "append_b",
  "drop_last",
  "reverse",
  "swapcase",
] as const;

export const PLANNER_DEPTHS = [1, 2, 3] as const;
export const MODEL_TIERS = ["fast", "smart"] as const;
export const PROMPT_STYLES = ["terse", "verbose"] as const;

const SPACE_MAX_STEPS = 16;
const SPACE_SYSTEM_PROMPT =
  "You operate a string workspace. Reach the target string, then stop.";

export interface HarnessDoc {
  model_config: { model_tier: string; prompt_style: string };
  orchestration: { max_steps: number; planner_depth: number };
  prompts: { system: string };
  tools: string[];
  [key: string]: JsonValue;
}

export function harnessKey(doc: HarnessDoc): string {
  return canonicalJson(doc);
}

export class HarnessSpace {
  readonly universe: string[];
  private readonly harnesses: HarnessDoc[];
  private readonly index: Map<string, number>;

  constructor(universe: readonly string[]) {
    if (universe.length === 0) {
      throw new Error("tool universe must be nonempty");
    }
    const wanted = new Set<string>();
    for (const tool of universe) {
      if (!(TOOL_UNIVERSE as readonly string[]).includes(tool)) {
        throw new Error(`unknown tool ${JSON.stringify(tool)}`);
      }
      if (wanted.has(tool)) {
        throw new Error(`duplicate tools in ${JSON.stringify(universe)}`);
      }
      wanted.add(tool);
    }
    // Universe order follows the global tool order, not argument order.
    this.universe = TOOL_UNIVERSE.filter((t) => wanted.has(t));
    this.harnesses = [];
    this.index = new Map();
    for (let i = 0; i < this.size(); i++) {
      const doc = this.buildAt(i);
      this.harnesses.push(doc);
      this.index.set(harnessKey(doc), i);
    }
  }

  static restricted(): HarnessSpace {
    return new HarnessSpace(TOOL_UNIVERSE.slice(0, 3));
  }

  static full(): HarnessSpace {
    return new HarnessSpace(TOOL_UNIVERSE);
  }

  static fromName(name: string): HarnessSpace {
    if (name === "restricted") return HarnessSpace.restricted();
    if (name === "full") return HarnessSpace.full();
    const tools = name
      .split(",")
      .map((part) => part.trim())
      .filter((part) => part.length > 0);
    return new HarnessSpace(tools);
  }

  size(): number {
    return (
      (2 ** this.universe.length - 1) *
      PLANNER_DEPTHS.length *
      MODEL_TIERS.length *
      PROMPT_STYLES.length
    );
  }

  private buildAt(index: number): HarnessDoc {
    const perMask = PLANNER_DEPTHS.length * MODEL_TIERS.length * PROMPT_STYLES.length;
    const mask = Math.floor(index / perMask) + 1;
    let rest = index % perMask;
    const depth = PLANNER_DEPTHS[Math.floor(rest / (MODEL_TIERS.length * PROMPT_STYLES.length))];
    rest %= MODEL_TIERS.length * PROMPT_STYLES.length;
    const tier = MODEL_TIERS[Math.floor(rest / PROMPT_STYLES.length)];
    const style = PROMPT_STYLES[rest % PROMPT_STYLES.length];
    return this.assemble(mask, depth, tier, style);
  }

  assemble(mask: number, depth: number, tier: string, style: string): HarnessDoc {
    const tools = this.universe.filter((_, i) => (mask >> i) & 1);
    return {
      model_config: { model_tier: tier, prompt_style: style },
      orchestration: { max_steps: SPACE_MAX_STEPS, planner_depth: depth },
      prompts: { system: SPACE_SYSTEM_PROMPT },
      tools,
    };
  }

  harnessAt(index: number): HarnessDoc {
    return this.harnesses[index];
  }

  all(): readonly HarnessDoc[] {
    return this.harnesses;
  }

  contains(doc: HarnessDoc): boolean {
    return this.index.has(harnessKey(doc));
  }

  maskOf(doc: HarnessDoc): number {
    const have = new Set(doc.tools);
    let mask = 0;
    this.universe.forEach((tool, i) => {
      if (have.has(tool)) mask |= 1 << i;
    });
    return mask;
  }

  coordinates(doc: HarnessDoc): [number, number, string, string] {
    return [
      this.maskOf(doc),
      doc.orchestration.planner_depth,
      doc.model_config.model_tier,
      doc.model_config.prompt_style,
    ];
  }
}

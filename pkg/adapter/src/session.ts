/**
 * Protocol session state for an evolution agent: one session per process,
 * newline-delimited canonical JSON in and out, hello/hello_ack handshake,
 * then evolve_req/evolve_resp pairs matched by seq.
 *
 * The decision function is the extension point. The default mirrors the
 * engine's builtin hill climber move for move, which is what makes exact
 * equivalence testing possible; swap in any other callable (a live model
 * call, a learned policy) to change what the agent proposes without touching
 * the protocol handling. Return null to report the space as exhausted.
 */

import { canonicalJson, type JsonValue } from "./canon.js";
import { evolveHillClimb, type HistoryEntryDoc } from "./hillClimb.js";
import { HarnessSpace, type HarnessDoc } from "./space.js";

export const PROTOCOL_VERSION = 1;

export type DecisionFn = (
  best: HarnessDoc,
  history: readonly HistoryEntryDoc[],
  params: Record<string, JsonValue>,
  seed: number,
) => HarnessDoc | null;

/** Default decision function: the deterministic hill climber. */
export const hillClimbDecision: DecisionFn = (best, history, params) => {
  const spaceName = typeof params?.space === "string" ? params.space : "restricted";
  return evolveHillClimb(best, history, HarnessSpace.fromName(spaceName));
};

interface EvolvePayload {
  best: HarnessDoc;
  history: HistoryEntryDoc[];
  params: Record<string, JsonValue>;
  seed: number;
}

/** What the caller should do with the process after a line is handled. */
export type LineOutcome = "ok" | "bad_version";

export class AdapterSession {
  readonly role: string;
  /** Protocol version agreed in the handshake; null until hello arrives. */
  negotiated: number | null = null;
  private readonly decide: DecisionFn;
  private readonly write: (line: string) => void;

  constructor(role: string, write: (line: string) => void, decide: DecisionFn = hillClimbDecision) {
    this.role = role;
    this.write = write;
    this.decide = decide;
  }

  private send(doc: JsonValue): void {
    this.write(canonicalJson(doc));
  }

  private sendError(seq: JsonValue, message: string): void {
    this.send({ payload: { message }, seq: typeof seq === "number" ? seq : 0, type: "error" });
  }

  handleLine(line: string): LineOutcome {
    if (line.trim() === "") return "ok";
    let doc: Record<string, JsonValue>;
    try {
      doc = JSON.parse(line);
    } catch {
      this.sendError(0, "unparseable request line");
      return "ok";
    }
    if (doc.type === "hello") {
      if (doc.protocol_version !== PROTOCOL_VERSION) {
        this.sendError(0, `unsupported protocol_version ${JSON.stringify(doc.protocol_version)}`);
        return "bad_version";
      }
      this.negotiated = PROTOCOL_VERSION;
      this.send({ protocol_version: PROTOCOL_VERSION, type: "hello_ack" });
      return "ok";
    }
    if (this.negotiated === null) {
      this.sendError(doc.seq ?? 0, "request before hello");
      return "ok";
    }
    if (doc.type === "evolve_req" && typeof doc.seq === "number") {
      this.handleEvolve(doc.seq, doc.payload as unknown as EvolvePayload);
      return "ok";
    }
    this.sendError(doc.seq ?? 0, `unknown request type ${JSON.stringify(doc.type)}`);
    return "ok";
  }

  private handleEvolve(seq: number, payload: EvolvePayload): void {
    let next: HarnessDoc | null;
    try {
      next = this.decide(payload.best, payload.history ?? [], payload.params ?? {}, payload.seed);
    } catch (err) {
      this.sendError(seq, `evolve failed: ${(err as Error).message}`);
      return;
    }
    if (next === null) {
      this.send({ payload: { space_exhausted: true }, seq, type: "evolve_resp" });
    } else {
      this.send({ payload: { harness: next }, seq, type: "evolve_resp" });
    }
  }
}

/**
 * Evolution agent entry point.
 *
 * Spawned by the engine with `--role evolution`, speaks the line protocol on
 * stdio via AdapterSession with the default hill-climb decision function.
 * Only JSON goes to stdout; diagnostics go to stderr. Exits 0 when stdin
 * closes, 2 for a role this agent cannot play, 3 on a protocol version
 * mismatch.
 */

import { createInterface } from "node:readline";
import { AdapterSession } from "./session.js";

function parseArgs(argv: string[]): { role: string } {
  let role = "";
  for (let i = 0; i < argv.length; i++) {
    if (argv[i] === "--role") {
      role = argv[i + 1] ?? "";
      i += 1;
    }
  }
  return { role };
}

function main(): void {
  const { role } = parseArgs(process.argv.slice(2));
  if (role !== "evolution") {
    process.stderr.write(`unsupported role ${JSON.stringify(role)}; this agent evolves harnesses\n`);
    process.exit(2);
  }

  const session = new AdapterSession(role, (line) => process.stdout.write(line + "\n"));
  const rl = createInterface({ input: process.stdin, terminal: false });
  rl.on("line", (line) => {
    if (session.handleLine(line) === "bad_version") {
      process.exit(3);
    }
  });
  rl.on("close", () => process.exit(0));
}

main();

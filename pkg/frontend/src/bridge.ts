#!/usr/bin/env node
/**
 * External-classifier bridge: speaks FAIRGEN-PROTO 1 on stdin/stdout.
 *
 * Usage:
 *   fairgen-bridge --model echo
 *   fairgen-bridge --model constant-score --score 0.9 [--threshold 0.5]
 *   fairgen-bridge --model brightness [--threshold 0.5]
 *
 * Protocol violations from the client terminate the session with a
 * nonzero exit status and a diagnostic on stderr; per-image read
 * failures degrade to an "unreadable" result instead.
 */

import { createInterface } from "node:readline";
import { parseArgs } from "node:util";

import { createModel, type Model } from "./models.js";
import { END, formatResult, HANDSHAKE, parseLine } from "./protocol.js";

function parseOptions(argv: string[]) {
  const { values } = parseArgs({
    args: argv,
    options: {
      model: { type: "string", default: "echo" },
      score: { type: "string", default: "1.0" },
      threshold: { type: "string", default: "0.5" },
    },
  });
  const score = Number(values.score);
  const threshold = Number(values.threshold);
  if (!(score >= 0 && score <= 1)) {
    throw new Error(`--score must be in [0, 1], got ${values.score}`);
  }
  if (!Number.isFinite(threshold)) {
    throw new Error(`--threshold must be numeric, got ${values.threshold}`);
  }
  return { model: createModel(values.model!, { score, threshold }) };
}

export async function runSession(
  input: NodeJS.ReadableStream,
  output: NodeJS.WritableStream,
  model: Model,
): Promise<number> {
  const lines = createInterface({ input, crlfDelay: Infinity });
  let greeted = false;
  for await (const line of lines) {
    if (!greeted) {
      if (line.trim() !== HANDSHAKE) {
        process.stderr.write(`bad handshake: ${line}\n`);
        return 1;
      }
      output.write(HANDSHAKE + "\n");
      greeted = true;
      continue;
    }
    const parsed = parseLine(line);
    if (parsed.kind === "end") {
      output.write(END + "\n");
      return 0;
    }
    if (parsed.kind === "invalid") {
      process.stderr.write(parsed.reason + "\n");
      return 1;
    }
    output.write(formatResult(await model(parsed.request)) + "\n");
  }
  process.stderr.write("client closed input without END\n");
  return 1;
}

async function main(): Promise<number> {
  let model: Model;
  try {
    ({ model } = parseOptions(process.argv.slice(2)));
  } catch (err) {
    process.stderr.write(`${String(err)}\n`);
    return 2;
  }
  return runSession(process.stdin, process.stdout, model);
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url.endsWith(process.argv[1].split("/").pop()!);

if (invokedDirectly) {
  main().then((code) => {
    process.exitCode = code;
  });
}

import { spawn } from "node:child_process";
import { join, dirname } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

const HERE = dirname(fileURLToPath(import.meta.url));
const BRIDGE = join(HERE, "..", "dist", "bridge.js");
const FIXTURE = join(HERE, "fixtures", "gradient.png");

interface SessionResult {
  code: number | null;
  lines: string[];
  stderr: string;
}

function runBridge(args: string[], input: string[]): Promise<SessionResult> {
  return new Promise((resolve, reject) => {
    const child = spawn("node", [BRIDGE, ...args], {
      stdio: ["pipe", "pipe", "pipe"],
    });
    let stdout = "";
    let stderr = "";
    child.stdout.on("data", (d) => (stdout += d));
    child.stderr.on("data", (d) => (stderr += d));
    child.on("error", reject);
    child.on("close", (code) =>
      resolve({ code, lines: stdout.split("\n").filter(Boolean), stderr }),
    );
    child.stdin.write(input.map((l) => l + "\n").join(""));
    child.stdin.end();
  });
}

describe("bridge session", () => {
  it("completes an echo session in request order", async () => {
    const ids = ["a1", "a2", "a3"];
    const { code, lines } = await runBridge(
      ["--model", "echo"],
      ["FAIRGEN-PROTO 1", ...ids.map((id) => `PREDICT ${id} /dev/null`), "END"],
    );
    expect(code).toBe(0);
    expect(lines[0]).toBe("FAIRGEN-PROTO 1");
    expect(lines.slice(1, -1)).toEqual(
      ids.map((id) => `RESULT ${id} melanoma 1.000000`),
    );
    expect(lines.at(-1)).toBe("END");
  });

  it("applies the decision threshold to constant scores", async () => {
    const high = await runBridge(
      ["--model", "constant-score", "--score", "0.7", "--threshold", "0.5"],
      ["FAIRGEN-PROTO 1", "PREDICT x /dev/null", "END"],
    );
    expect(high.lines[1]).toBe("RESULT x melanoma 0.700000");
    const low = await runBridge(
      ["--model", "constant-score", "--score", "0.3", "--threshold", "0.5"],
      ["FAIRGEN-PROTO 1", "PREDICT x /dev/null", "END"],
    );
    expect(low.lines[1]).toBe("RESULT x not-melanoma 0.300000");
  });

  it("scores real images by mean brightness", async () => {
    const { code, lines } = await runBridge(
      ["--model", "brightness", "--threshold", "0.4"],
      ["FAIRGEN-PROTO 1", `PREDICT g1 ${FIXTURE}`, "END"],
    );
    expect(code).toBe(0);
    expect(lines[1]).toBe("RESULT g1 melanoma 0.500000");
  });

  it("degrades unreadable images to a sentinel result", async () => {
    const { code, lines, stderr } = await runBridge(
      ["--model", "brightness"],
      ["FAIRGEN-PROTO 1", "PREDICT bad /no/such/file.png", "END"],
    );
    expect(code).toBe(0);
    expect(lines[1]).toBe("RESULT bad unreadable 0.000000");
    expect(stderr).toContain("bad");
  });

  it("rejects a wrong handshake", async () => {
    const { code, stderr } = await runBridge(
      ["--model", "echo"],
      ["SOME-OTHER-PROTO", "END"],
    );
    expect(code).toBe(1);
    expect(stderr).toContain("bad handshake");
  });

  it("rejects malformed requests", async () => {
    const { code } = await runBridge(
      ["--model", "echo"],
      ["FAIRGEN-PROTO 1", "PREDICT missing-path"],
    );
    expect(code).toBe(1);
  });

  it("fails closed when input ends without END", async () => {
    const { code, stderr } = await runBridge(
      ["--model", "echo"],
      ["FAIRGEN-PROTO 1", "PREDICT x /dev/null"],
    );
    expect(code).toBe(1);
    expect(stderr).toContain("without END");
  });

  it("rejects unknown models and bad flags", async () => {
    const unknown = await runBridge(["--model", "nope"], []);
    expect(unknown.code).toBe(2);
    const badScore = await runBridge(
      ["--model", "constant-score", "--score", "7"],
      [],
    );
    expect(badScore.code).toBe(2);
  });

  it("handles a full 600-request chunked session", async () => {
    const ids = Array.from({ length: 600 }, (_, i) => `s${i}`);
    const { code, lines } = await runBridge(
      ["--model", "constant-score", "--score", "0.25"],
      ["FAIRGEN-PROTO 1", ...ids.map((id) => `PREDICT ${id} /dev/null`), "END"],
    );
    expect(code).toBe(0);
    expect(lines).toHaveLength(602);
    expect(lines[300]).toBe(`RESULT ${ids[299]} not-melanoma 0.250000`);
  });
});

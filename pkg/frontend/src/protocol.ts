/**
 * FAIRGEN-PROTO 1 line protocol.
 *
 * Session shape (client = audit harness, server = this bridge):
 *
 *   client: FAIRGEN-PROTO 1
 *   server: FAIRGEN-PROTO 1
 *   client: PREDICT <sample_id> <image_path>   (repeated, in chunks)
 *   server: RESULT <sample_id> <label> <score>  (one per request, in order)
 *   client: END
 *   server: END
 *
 * Scores must lie in [0, 1]. Ids and labels are whitespace-free tokens.
 */

export const HANDSHAKE = "FAIRGEN-PROTO 1";
export const END = "END";

export interface PredictRequest {
  sampleId: string;
  imagePath: string;
}

export interface PredictResult {
  sampleId: string;
  label: string;
  score: number;
}

export type ParsedLine =
  | { kind: "predict"; request: PredictRequest }
  | { kind: "end" }
  | { kind: "invalid"; reason: string };

export function parseLine(line: string): ParsedLine {
  const trimmed = line.trim();
  if (trimmed === END) {
    return { kind: "end" };
  }
  const parts = trimmed.split(/\s+/);
  if (parts.length !== 3 || parts[0] !== "PREDICT") {
    return { kind: "invalid", reason: `expected PREDICT or END, got: ${line}` };
  }
  return {
    kind: "predict",
    request: { sampleId: parts[1], imagePath: parts[2] },
  };
}

export function formatResult(result: PredictResult): string {
  if (!(result.score >= 0 && result.score <= 1)) {
    throw new RangeError(`score ${result.score} outside [0, 1]`);
  }
  if (/\s/.test(result.sampleId) || /\s/.test(result.label)) {
    throw new RangeError("ids and labels must not contain whitespace");
  }
  return `RESULT ${result.sampleId} ${result.label} ${result.score.toFixed(6)}`;
}

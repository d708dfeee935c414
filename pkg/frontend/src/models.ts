/**
 * Bridge model implementations.
 *
 * A model maps a PREDICT request to a (label, score) pair. The label is
 * "melanoma" when the score clears the decision threshold, otherwise
 * "not-melanoma"; unreadable images get the sentinel label "unreadable"
 * with score 0 so the session stays protocol-valid.
 */

import { readFile } from "node:fs/promises";

import { decodeGrayPng, meanIntensity } from "./png.js";
import type { PredictRequest, PredictResult } from "./protocol.js";

export interface ModelOptions {
  score: number;
  threshold: number;
}

export type Model = (request: PredictRequest) => Promise<PredictResult>;

function labelFor(score: number, threshold: number): string {
  return score > threshold ? "melanoma" : "not-melanoma";
}

/** Always answers melanoma with full confidence; ignores the image. */
export function echoModel(): Model {
  return async ({ sampleId }) => ({ sampleId, label: "melanoma", score: 1.0 });
}

/** Fixed score for every sample; label decided by the threshold. */
export function constantScoreModel(options: ModelOptions): Model {
  const { score, threshold } = options;
  return async ({ sampleId }) => ({
    sampleId,
    label: labelFor(score, threshold),
    score,
  });
}

/** Scores by mean pixel intensity of the grayscale image. */
export function brightnessModel(options: ModelOptions): Model {
  const { threshold } = options;
  return async ({ sampleId, imagePath }) => {
    let score: number;
    try {
      score = meanIntensity(decodeGrayPng(await readFile(imagePath)));
    } catch (err) {
      process.stderr.write(`warning: ${sampleId}: ${String(err)}\n`);
      return { sampleId, label: "unreadable", score: 0.0 };
    }
    return { sampleId, label: labelFor(score, threshold), score };
  };
}

export function createModel(name: string, options: ModelOptions): Model {
  switch (name) {
    case "echo":
      return echoModel();
    case "constant-score":
      return constantScoreModel(options);
    case "brightness":
      return brightnessModel(options);
    default:
      throw new Error(`unknown model ${JSON.stringify(name)}`);
  }
}

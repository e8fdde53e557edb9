/**
 * Native-side policy loading: reads the text weights format (header
 * `<feature_len> cols=6`, one row of decimal reals per feature) and
 * returns a greedy action function.  Ties break to the lowest action
 * index, matching the simulator's argmax rule.
 */

import { existsSync, readFileSync } from "node:fs";

import { ACTION_COUNT } from "./protocol.js";

export class MissingWeightsFileError extends Error {
  constructor(path: string) {
    super(`missing weights file: ${path}`);
    this.name = "MissingWeightsFileError";
  }
}

export class WeightsFormatError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "WeightsFormatError";
  }
}

export class DimensionMismatchError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "DimensionMismatchError";
  }
}

export interface LoadedPolicy {
  featureLen: number;
  /** Row-major [featureLen][ACTION_COUNT]. */
  weights: number[][];
  /** Greedy action code for one observation vector. */
  actionOf(observation: number[]): number;
}

export function parseWeights(text: string): LoadedPolicy {
  const lines = text.split("\n").filter((line) => line.trim().length > 0);
  if (lines.length === 0) {
    throw new WeightsFormatError("weights file is empty");
  }
  const head = lines[0].split(/\s+/);
  if (head[0] === "scripted") {
    throw new WeightsFormatError("scripted policies have no weight table");
  }
  if (head.length !== 2 || head[1] !== `cols=${ACTION_COUNT}`) {
    throw new WeightsFormatError(`bad weights header: ${lines[0]}`);
  }
  const featureLen = Number(head[0]);
  if (!Number.isInteger(featureLen) || featureLen < 0) {
    throw new WeightsFormatError(`bad feature length: ${head[0]}`);
  }
  const rows = lines.slice(1);
  if (rows.length !== featureLen) {
    throw new WeightsFormatError(
      `expected ${featureLen} weight rows, found ${rows.length}`,
    );
  }
  const weights: number[][] = [];
  for (const row of rows) {
    const values = row.trim().split(/\s+/).map(Number);
    if (values.length !== ACTION_COUNT || values.some((v) => Number.isNaN(v))) {
      throw new WeightsFormatError(`bad weights row: ${row}`);
    }
    weights.push(values);
  }
  return {
    featureLen,
    weights,
    actionOf(observation: number[]): number {
      if (observation.length !== featureLen) {
        throw new DimensionMismatchError(
          `observation length ${observation.length} != ${featureLen}`,
        );
      }
      const scores = new Array<number>(ACTION_COUNT).fill(0);
      for (let f = 0; f < featureLen; f++) {
        const x = observation[f];
        for (let a = 0; a < ACTION_COUNT; a++) {
          scores[a] += x * weights[f][a];
        }
      }
      let best = 0;
      for (let a = 1; a < ACTION_COUNT; a++) {
        if (scores[a] > scores[best]) best = a;
      }
      return best;
    },
  };
}

export function loadPolicy(path: string): LoadedPolicy {
  if (!existsSync(path)) {
    throw new MissingWeightsFileError(path);
  }
  return parseWeights(readFileSync(path, "utf-8"));
}

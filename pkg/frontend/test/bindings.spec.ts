import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { EnvHandle } from "../src/env.js";
import {
  DimensionMismatchError,
  MissingWeightsFileError,
  WeightsFormatError,
  loadPolicy,
  parseWeights,
} from "../src/policy.js";
import { ClosedHandleError, ProtocolError } from "../src/protocol.js";

const REPO_SRC = fileURLToPath(new URL("../../src", import.meta.url));
const LAYOUT = fileURLToPath(
  new URL("../../src/manycooks/layouts/open_room_2p.layout", import.meta.url),
);

/** Deterministic PRNG so the 400-tick parity script is reproducible. */
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function randomScript(ticks: number, seats: number, seed: number): number[][] {
  const rand = mulberry32(seed);
  const script: number[][] = [];
  for (let t = 0; t < ticks; t++) {
    const joint: number[] = [];
    for (let s = 0; s < seats; s++) joint.push(Math.floor(rand() * 6));
    script.push(joint);
  }
  return script;
}

describe("environment handle", () => {
  let env: EnvHandle;

  beforeAll(async () => {
    env = await EnvHandle.open({
      layoutPath: LAYOUT,
      horizon: 400,
      pythonPath: REPO_SRC,
    });
  });

  afterAll(async () => {
    await env.close();
  });

  it("describes the two-seat layout", () => {
    expect(env.nAgents).toBe(2);
    expect(env.obsLen).toBe(31);
    expect(env.actionCount).toBe(6);
    expect(env.layoutName).toBe("open_room_2p");
  });

  it("reset returns one observation vector per seat", async () => {
    const observations = await env.reset();
    expect(observations).toHaveLength(2);
    for (const obs of observations) expect(obs).toHaveLength(31);
  });

  it("two resets produce identical observations", async () => {
    const first = await env.reset();
    const second = await env.reset();
    expect(second).toEqual(first);
  });

  it("reward is zero on a non-delivery tick", async () => {
    await env.reset();
    const result = await env.step([2, 3]);
    expect(result.reward).toBe(0);
    expect(result.done).toBe(false);
    expect(result.info.digest).toMatch(/^[0-9a-f]{16}$/);
  });

  it("rejects bad action codes", async () => {
    await env.reset();
    await expect(env.step([7, 0])).rejects.toMatchObject({
      name: "ProtocolError",
      code: "BadActionCode",
    });
  });

  it("rejects the wrong action count", async () => {
    await env.reset();
    await expect(env.step([0])).rejects.toMatchObject({
      code: "ActionCountMismatch",
    });
  });

  it(
    "step-by-step digests match the native one-shot rollout over 400 ticks",
    async () => {
      const script = randomScript(400, 2, 0xc00c5);
      const native = await env.rollout(script);
      expect(native.digests).toHaveLength(400);

      await env.reset();
      const stepped: string[] = [];
      const rewards: number[] = [];
      let done = false;
      for (const joint of script) {
        expect(done).toBe(false);
        const result = await env.step(joint);
        stepped.push(result.info.digest);
        rewards.push(result.reward);
        done = result.done;
      }
      expect(done).toBe(true);
      expect(stepped).toEqual(native.digests);
      expect(rewards).toEqual(native.rewards);
    },
    30000,
  );

  it("stepping past the horizon requires a reset", async () => {
    await env.reset();
    const script = randomScript(400, 2, 1);
    for (const joint of script) await env.step(joint);
    await expect(env.step([4, 4])).rejects.toMatchObject({ code: "ResetRequired" });
    await env.reset();
    await env.step([4, 4]);
  });
});

describe("closed handles", () => {
  it("raise on any use after close", async () => {
    const env = await EnvHandle.open({
      layoutPath: LAYOUT,
      horizon: 10,
      pythonPath: REPO_SRC,
    });
    await env.reset();
    await env.close();
    await expect(env.reset()).rejects.toBeInstanceOf(ClosedHandleError);
    await expect(env.step([4, 4])).rejects.toBeInstanceOf(ClosedHandleError);
  });
});

describe("policy loading", () => {
  const dir = mkdtempSync(join(tmpdir(), "manycooks-weights-"));

  function writeWeights(name: string, weights: number[][]): string {
    const lines = [`${weights.length} cols=6`];
    for (const row of weights) lines.push(row.map((v) => v.toString()).join(" "));
    const path = join(dir, name);
    writeFileSync(path, lines.join("\n") + "\n");
    return path;
  }

  it("zero weights break argmax ties to action 0", () => {
    const path = writeWeights("zero.txt", Array.from({ length: 31 }, () => new Array(6).fill(0)));
    const policy = loadPolicy(path);
    expect(policy.actionOf(new Array(31).fill(1))).toBe(0);
  });

  it("missing file raises", () => {
    expect(() => loadPolicy(join(dir, "absent.txt"))).toThrow(MissingWeightsFileError);
  });

  it("corrupt files raise", () => {
    const path = join(dir, "corrupt.txt");
    writeFileSync(path, "31 cols=6\n1 2 3\n");
    expect(() => loadPolicy(path)).toThrow(WeightsFormatError);
    expect(() => parseWeights("scripted GreedyCook\n")).toThrow(WeightsFormatError);
  });

  it("rejects observation vectors of the wrong length", () => {
    const path = writeWeights("short.txt", [[1, 0, 0, 0, 0, 0]]);
    const policy = loadPolicy(path);
    expect(() => policy.actionOf([1, 2])).toThrow(DimensionMismatchError);
  });

  it(
    "greedy actions agree with the native argmax on 1000 random observations",
    async () => {
      const rand = mulberry32(0xfeed);
      const featureLen = 31;
      const weights = Array.from({ length: featureLen }, () =>
        Array.from({ length: 6 }, () => (rand() - 0.5) * 4),
      );
      const path = writeWeights("random.txt", weights);
      const policy = loadPolicy(path);

      const observations = Array.from({ length: 1000 }, () =>
        Array.from({ length: featureLen }, () => (rand() - 0.5) * 2),
      );
      const mine = observations.map((obs) => policy.actionOf(obs));

      const env = await EnvHandle.open({
        layoutPath: LAYOUT,
        horizon: 10,
        pythonPath: REPO_SRC,
      });
      try {
        const native = await env.nativeArgmax(path, observations);
        expect(mine).toEqual(native);
      } finally {
        await env.close();
      }
    },
    30000,
  );
});

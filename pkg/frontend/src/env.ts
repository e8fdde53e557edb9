/**
 * EnvHandle: gym-style reset/step over a native simulator subprocess.
 *
 * The handle owns one `python -m manycooks.envserver` process and speaks
 * the line-delimited JSON protocol.  Requests are strictly sequential;
 * a handle is single-threaded by design, spawn more handles for
 * parallelism.  reset() returns one observation vector per seat;
 * step(actions) returns (observations, reward, done, info).
 */

import { spawn, type ChildProcessWithoutNullStreams } from "node:child_process";
import { createInterface, type Interface } from "node:readline";

import {
  ClosedHandleError,
  ProtocolError,
  type ArgmaxResponse,
  type InfoResponse,
  type ResetResponse,
  type Response,
  type RolloutResponse,
  type StepResponse,
} from "./protocol.js";

export interface EnvOptions {
  /** Path to a .layout file understood by the simulator. */
  layoutPath: string;
  /** Episode length in ticks; step() reports done when it is reached. */
  horizon?: number;
  /** Python executable to launch; defaults to $MANYCOOKS_PYTHON or python3. */
  python?: string;
  /** Extra PYTHONPATH entry so a source checkout works without installing. */
  pythonPath?: string;
}

export class EnvHandle {
  private proc: ChildProcessWithoutNullStreams;
  private lines: Interface;
  private pending: Array<{
    resolve: (value: Response) => void;
    reject: (err: Error) => void;
  }> = [];
  private closed = false;
  private stderrTail = "";

  /** Seats in the layout; populated by init(). */
  nAgents = 0;
  /** Observation vector length per seat; populated by init(). */
  obsLen = 0;
  /** Always 6. */
  actionCount = 0;
  horizon = 0;
  layoutName = "";

  private constructor(options: EnvOptions) {
    const python = options.python ?? process.env.MANYCOOKS_PYTHON ?? "python3";
    const args = [
      "-m",
      "manycooks.envserver",
      "--layout",
      options.layoutPath,
      "--horizon",
      String(options.horizon ?? 400),
    ];
    const env = { ...process.env };
    if (options.pythonPath) {
      env.PYTHONPATH = options.pythonPath + (env.PYTHONPATH ? `:${env.PYTHONPATH}` : "");
    }
    this.proc = spawn(python, args, { env, stdio: ["pipe", "pipe", "pipe"] });
    this.proc.stderr.on("data", (chunk: Buffer) => {
      this.stderrTail = (this.stderrTail + chunk.toString()).slice(-2000);
    });
    this.lines = createInterface({ input: this.proc.stdout });
    this.lines.on("line", (line) => {
      const waiter = this.pending.shift();
      if (!waiter) return;
      try {
        waiter.resolve(JSON.parse(line) as Response);
      } catch (err) {
        waiter.reject(err as Error);
      }
    });
    this.proc.on("exit", () => {
      const err = new Error(`environment process exited: ${this.stderrTail}`);
      while (this.pending.length) this.pending.shift()!.reject(err);
    });
  }

  /** Spawn a simulator process and read its static description. */
  static async open(options: EnvOptions): Promise<EnvHandle> {
    const handle = new EnvHandle(options);
    const info = (await handle.request({ op: "info" })) as InfoResponse;
    handle.nAgents = info.n_agents;
    handle.obsLen = info.obs_len;
    handle.actionCount = info.action_count;
    handle.horizon = info.horizon;
    handle.layoutName = info.layout_name;
    return handle;
  }

  private request(payload: object): Promise<Response> {
    if (this.closed) return Promise.reject(new ClosedHandleError());
    return new Promise((resolve, reject) => {
      this.pending.push({
        resolve: (response) => {
          if (response.ok === false) {
            reject(new ProtocolError(response.error, response.message));
          } else {
            resolve(response);
          }
        },
        reject,
      });
      this.proc.stdin.write(JSON.stringify(payload) + "\n");
    });
  }

  async reset(): Promise<number[][]> {
    const response = (await this.request({ op: "reset" })) as ResetResponse;
    return response.observations;
  }

  async step(actions: number[]): Promise<{
    observations: number[][];
    reward: number;
    done: boolean;
    info: StepResponse["info"];
  }> {
    const response = (await this.request({ op: "step", actions })) as StepResponse;
    return {
      observations: response.observations,
      reward: response.reward,
      done: response.done,
      info: response.info,
    };
  }

  /** One-shot native episode for the same layout/config: per-tick digests
   * and rewards, without touching this handle's episode state. */
  async rollout(script: number[][]): Promise<{ digests: string[]; rewards: number[] }> {
    const response = (await this.request({
      op: "rollout",
      actions: script,
    })) as RolloutResponse;
    return { digests: response.digests, rewards: response.rewards };
  }

  /** Native greedy actions for observation vectors under a weights file. */
  async nativeArgmax(weightsPath: string, observations: number[][]): Promise<number[]> {
    const response = (await this.request({
      op: "argmax",
      weights: weightsPath,
      observations,
    })) as ArgmaxResponse;
    return response.actions;
  }

  async close(): Promise<void> {
    if (this.closed) return;
    this.closed = true;
    try {
      this.proc.stdin.write(JSON.stringify({ op: "close" }) + "\n");
    } catch {
      // process already gone
    }
    await new Promise<void>((resolve) => {
      const timer = setTimeout(() => {
        this.proc.kill();
        resolve();
      }, 2000);
      this.proc.once("exit", () => {
        clearTimeout(timer);
        resolve();
      });
    });
  }
}

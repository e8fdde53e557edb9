/**
 * Wire types for the line-delimited JSON environment protocol.
 *
 * One request object per line on stdin, one response per line on stdout.
 * Action codes: 0 North, 1 South, 2 East, 3 West, 4 Stay, 5 Interact.
 */

export const ACTION_COUNT = 6;

export interface InfoResponse {
  ok: true;
  n_agents: number;
  obs_len: number;
  action_count: number;
  horizon: number;
  layout_name: string;
}

export interface ResetResponse {
  ok: true;
  observations: number[][];
  tick: number;
}

export interface StepInfo {
  tick: number;
  digest: string;
  deliveries: number;
  events: [string, number, number | null][];
}

export interface StepResponse {
  ok: true;
  observations: number[][];
  reward: number;
  done: boolean;
  info: StepInfo;
}

export interface RolloutResponse {
  ok: true;
  digests: string[];
  rewards: number[];
}

export interface ArgmaxResponse {
  ok: true;
  actions: number[];
}

export interface ErrorResponse {
  ok: false;
  error: string;
  message: string;
}

export type Response =
  | InfoResponse
  | ResetResponse
  | StepResponse
  | RolloutResponse
  | ArgmaxResponse
  | ErrorResponse;

/** Raised when the server answers ok=false. */
export class ProtocolError extends Error {
  constructor(
    public readonly code: string,
    message: string,
  ) {
    super(`${code}: ${message}`);
    this.name = "ProtocolError";
  }
}

/** Raised when a handle is used after close(). */
export class ClosedHandleError extends Error {
  constructor() {
    super("environment handle is closed");
    this.name = "ClosedHandleError";
  }
}

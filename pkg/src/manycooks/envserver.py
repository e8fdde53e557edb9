"""Line-delimited JSON environment server for foreign-language bindings.

Run as ``python -m manycooks.envserver --layout <file> [--horizon N]``.
Each stdin line is one request object; each response is one stdout line.
Requests:

    {"op": "info"}                      -> seat count, observation length
    {"op": "reset"}                     -> per-seat observations
    {"op": "step", "actions": [0..5]*N} -> observations, reward, done, info
    {"op": "rollout", "actions": [[...], ...]}
                                        -> per-tick digests and rewards from
                                           a fresh one-shot native episode
    {"op": "argmax", "weights": path, "observations": [[...], ...]}
                                        -> native greedy action per vector
    {"op": "close"}                     -> acknowledges and exits

Errors come back as {"ok": false, "error": <code>, "message": ...}; the
session survives everything except ``close`` and EOF.  The primary test
suite never imports this module; deleting it (and the bindings package
that drives it) leaves the rest of the library untouched.
"""

from __future__ import annotations

import argparse
import json
import sys

from .digests import state_digest
from .engine import (
    ActionCountMismatch,
    EngineConfig,
    NUM_ACTIONS,
    featurize,
    observation_length,
    reset,
    step,
)
from .layout import Layout, load_layout_file
from .policy import (
    DimensionMismatch,
    KIND_LINEAR,
    MissingWeightsFile,
    PolicyError,
    load_weights,
)


class RequestError(ValueError):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class EnvSession:
    """One environment instance stepped over the wire."""

    def __init__(self, layout: Layout, config: EngineConfig):
        self.layout = layout
        self.config = config
        self.state = None

    def observations(self) -> list[list[float]]:
        return [
            featurize(self.state, seat, self.layout, self.config).tolist()
            for seat in range(self.layout.num_agents)
        ]

    def handle_info(self, _request: dict) -> dict:
        return {
            "n_agents": self.layout.num_agents,
            "obs_len": observation_length(self.layout.num_agents),
            "action_count": NUM_ACTIONS,
            "horizon": self.config.horizon,
            "layout_name": self.layout.name,
        }

    def handle_reset(self, _request: dict) -> dict:
        self.state = reset(self.layout)
        return {"observations": self.observations(), "tick": 0}

    def _checked_actions(self, request: dict) -> list[int]:
        actions = request.get("actions")
        if not isinstance(actions, list):
            raise RequestError("ActionCountMismatch", "actions must be a list")
        if len(actions) != self.layout.num_agents:
            raise RequestError(
                "ActionCountMismatch",
                f"got {len(actions)} actions for {self.layout.num_agents} seats",
            )
        for a in actions:
            if not isinstance(a, int) or not 0 <= a < NUM_ACTIONS:
                raise RequestError("BadActionCode", f"bad action code {a!r}")
        return actions

    def handle_step(self, request: dict) -> dict:
        if self.state is None:
            raise RequestError("ResetRequired", "call reset before step")
        if self.state.tick >= self.config.horizon:
            raise RequestError("ResetRequired", "episode finished; call reset")
        actions = self._checked_actions(request)
        outcome = step(self.state, actions, self.layout, self.config)
        self.state = outcome.next_state
        return {
            "observations": self.observations(),
            "reward": outcome.shared_reward,
            "done": self.state.tick >= self.config.horizon,
            "info": {
                "tick": self.state.tick,
                "digest": state_digest(self.state),
                "deliveries": self.state.deliveries,
                "events": [[e.kind, e.seat, e.obj] for e in outcome.events],
            },
        }

    def handle_rollout(self, request: dict) -> dict:
        script = request.get("actions")
        if not isinstance(script, list):
            raise RequestError("ActionCountMismatch", "actions must be a list of ticks")
        state = reset(self.layout)
        digests = []
        rewards = []
        for joint in script:
            if (
                not isinstance(joint, list)
                or len(joint) != self.layout.num_agents
                or any(not isinstance(a, int) or not 0 <= a < NUM_ACTIONS for a in joint)
            ):
                raise RequestError("BadActionCode", f"bad joint action {joint!r}")
            outcome = step(state, joint, self.layout, self.config)
            state = outcome.next_state
            digests.append(state_digest(state))
            rewards.append(outcome.shared_reward)
        return {"digests": digests, "rewards": rewards}

    def handle_argmax(self, request: dict) -> dict:
        try:
            params = load_weights(request["weights"])
        except KeyError:
            raise RequestError("MissingWeightsFile", "request needs a weights path") from None
        except MissingWeightsFile as exc:
            raise RequestError("MissingWeightsFile", str(exc)) from None
        except PolicyError as exc:
            raise RequestError("DimensionMismatch", str(exc)) from None
        if params.kind != KIND_LINEAR:
            raise RequestError("DimensionMismatch", "argmax needs a linear policy")
        observations = request.get("observations")
        if not isinstance(observations, list):
            raise RequestError("DimensionMismatch", "observations must be a list")
        actions = []
        for obs in observations:
            if len(obs) != params.feature_len:
                raise RequestError(
                    "DimensionMismatch",
                    f"observation length {len(obs)} != {params.feature_len}",
                )
            scores = [
                sum(obs[i] * params.weights[i, a] for i in range(params.feature_len))
                for a in range(NUM_ACTIONS)
            ]
            best = 0
            for a in range(1, NUM_ACTIONS):
                if scores[a] > scores[best]:
                    best = a
            actions.append(best)
        return {"actions": actions}


def serve(layout: Layout, config: EngineConfig, stdin=None, stdout=None) -> None:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    session = EnvSession(layout, config)
    handlers = {
        "info": session.handle_info,
        "reset": session.handle_reset,
        "step": session.handle_step,
        "rollout": session.handle_rollout,
        "argmax": session.handle_argmax,
    }
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError as exc:
            response = {"ok": False, "error": "BadRequest", "message": str(exc)}
            print(json.dumps(response), file=stdout, flush=True)
            continue
        op = request.get("op")
        if op == "close":
            print(json.dumps({"ok": True}), file=stdout, flush=True)
            return
        handler = handlers.get(op)
        try:
            if handler is None:
                raise RequestError("UnknownOp", f"unknown op {op!r}")
            payload = handler(request)
            payload["ok"] = True
            response = payload
        except RequestError as exc:
            response = {"ok": False, "error": exc.code, "message": str(exc)}
        except (ActionCountMismatch, DimensionMismatch) as exc:
            response = {"ok": False, "error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(response), file=stdout, flush=True)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="manycooks-envserver")
    parser.add_argument("--layout", required=True)
    parser.add_argument("--horizon", type=int, default=400)
    parser.add_argument("--shaping", action="store_true")
    args = parser.parse_args(argv)
    layout = load_layout_file(args.layout)
    config = EngineConfig(horizon=args.horizon, shaping=args.shaping)
    serve(layout, config)
    return 0


if __name__ == "__main__":
    sys.exit(main())

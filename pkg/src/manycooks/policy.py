"""Policies over the 6-action space: linear-softmax, scripted baselines,
and a batch REINFORCE update with a running-mean baseline.

Policy parameters are immutable snapshots; action selection is pure given
a caller-supplied random generator, so rollouts can fan out across threads
while a single learner thread owns updates.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .engine import Action, GameState, HeldObject, ORIENTATION_OFFSETS, PotPhase
from .layout import Layout

NUM_ACTIONS = 6

KIND_LINEAR = "linear"
KIND_SCRIPTED = "scripted"

SCRIPTED_NAMES = ("Random", "Stationary", "GreedyCook")


class PolicyError(ValueError):
    pass


class DimensionMismatch(PolicyError):
    pass


class UnknownName(PolicyError):
    pass


class NonFiniteGradient(PolicyError):
    pass


class WeightsFormatError(PolicyError):
    pass


class MissingWeightsFile(PolicyError):
    pass


@dataclass(frozen=True, eq=False)
class PolicyParams:
    """Frozen policy snapshot: a linear weight matrix or a scripted rule."""

    kind: str
    weights: np.ndarray  # shape (feature_len, 6); (0, 6) for scripted
    scripted_name: str | None = None

    @property
    def feature_len(self) -> int:
        return self.weights.shape[0]


def linear_params(weights: np.ndarray) -> PolicyParams:
    weights = np.asarray(weights, dtype=np.float64)
    if weights.ndim != 2 or weights.shape[1] != NUM_ACTIONS:
        raise DimensionMismatch(f"weights must be (feature_len, {NUM_ACTIONS}), got {weights.shape}")
    if not np.isfinite(weights).all():
        raise PolicyError("linear weights must all be finite")
    return PolicyParams(kind=KIND_LINEAR, weights=weights)


def zero_params(feature_len: int) -> PolicyParams:
    return linear_params(np.zeros((feature_len, NUM_ACTIONS)))


def scripted_policy(name: str) -> PolicyParams:
    """Stand-in collaborators: Random, Stationary, or GreedyCook."""
    if name not in SCRIPTED_NAMES:
        raise UnknownName(f"unknown scripted policy {name!r}")
    return PolicyParams(
        kind=KIND_SCRIPTED,
        weights=np.zeros((0, NUM_ACTIONS)),
        scripted_name=name,
    )


def params_equal(a: PolicyParams, b: PolicyParams) -> bool:
    return (
        a.kind == b.kind
        and a.scripted_name == b.scripted_name
        and a.weights.shape == b.weights.shape
        and bool(np.array_equal(a.weights, b.weights))
    )


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def action_distribution(
    params: PolicyParams,
    obs: np.ndarray | None,
    *,
    state: GameState | None = None,
    seat: int | None = None,
    layout: Layout | None = None,
) -> np.ndarray:
    """Probabilities over the 6 actions.

    Linear policies softmax ``obs @ weights`` and ignore the game context;
    scripted policies ignore ``obs`` and need (state, seat, layout).
    Stationary and GreedyCook emit deterministic one-hots, Random is
    uniform.
    """
    if params.kind == KIND_LINEAR:
        obs = np.asarray(obs, dtype=np.float64)
        if obs.shape != (params.feature_len,):
            raise DimensionMismatch(
                f"observation length {obs.shape} does not match weights rows {params.feature_len}"
            )
        return softmax(obs @ params.weights)
    name = params.scripted_name
    if name == "Random":
        return np.full(NUM_ACTIONS, 1.0 / NUM_ACTIONS)
    if state is None or seat is None or layout is None:
        raise PolicyError("scripted policies need state, seat and layout context")
    if name == "Stationary":
        action = int(Action.STAY)
    else:
        action = greedy_cook_action(state, seat, layout)
    probs = np.zeros(NUM_ACTIONS)
    probs[action] = 1.0
    return probs


def sample_action(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw; one generator call per action for reproducibility."""
    r = rng.random()
    acc = 0.0
    for a in range(NUM_ACTIONS - 1):
        acc += probs[a]
        if r < acc:
            return a
    return NUM_ACTIONS - 1


def argmax_action(probs: np.ndarray) -> int:
    """Greedy pick; ties break to the lowest action index."""
    return int(np.argmax(probs))


# ---------------------------------------------------------------------------
# GreedyCook: fixed subgoal cycle navigated by breadth-first shortest paths.


def bfs_distances(
    layout: Layout,
    start: tuple[int, int],
    blocked: frozenset[tuple[int, int]] = frozenset(),
) -> dict[tuple[int, int], int]:
    """Shortest path lengths over Floor cells from ``start``, skipping
    ``blocked`` cells (used for other agents' current positions)."""
    dist = {start: 0}
    queue = deque([start])
    while queue:
        cell = queue.popleft()
        d = dist[cell] + 1
        for nxt in layout.floor_neighbors(*cell):
            if nxt not in dist and nxt not in blocked:
                dist[nxt] = d
                queue.append(nxt)
    return dist


def _direction_toward(src: tuple[int, int], dst: tuple[int, int]) -> int:
    dx, dy = dst[0] - src[0], dst[1] - src[1]
    return ORIENTATION_OFFSETS.index((dx, dy))


def greedy_cook_action(state: GameState, seat: int, layout: Layout) -> int:
    """One action of the cook cycle: fetch onion, fill a pot three times,
    fetch a dish once a pot is cooking or ready, collect the soup, deliver.

    Targets are ranked by path length with ties broken by smallest (y, x)
    of the station cell; the first step along the path breaks ties the
    same way.  Other agents' cells are treated as blocked, so a crowded
    route detours instead of livelocking head-on; returns Stay when no
    subgoal is currently reachable (waiting for a cell to clear).
    """
    me = state.agents[seat]
    held = me.held
    pots = state.pots
    others = frozenset(a.pos for i, a in enumerate(state.agents) if i != seat)

    if held == HeldObject.SOUP:
        candidates = layout.serving_cells
    elif held == HeldObject.DISH:
        ready = [c for c, p in pots.items() if p.phase == PotPhase.READY]
        cooking = [c for c, p in pots.items() if p.phase == PotPhase.COOKING]
        candidates = ready or cooking or layout.pot_cells
    elif held == HeldObject.ONION:
        candidates = [c for c, p in pots.items() if p.phase == PotPhase.IDLE]
        if not candidates:
            return int(Action.STAY)
    else:
        if any(p.phase != PotPhase.IDLE for p in pots.values()):
            candidates = layout.dish_dispenser_cells
        else:
            candidates = layout.onion_dispenser_cells

    dist = bfs_distances(layout, me.pos, blocked=others)

    def standing_distance(adj: tuple[int, int]) -> int | None:
        d = dist.get(adj)
        if d is not None:
            return d
        if adj in others:
            # Occupied standing cells may end a path: approach and wait
            # for the occupant to leave rather than deadlock.
            approach = [dist[nb] for nb in layout.floor_neighbors(*adj) if nb in dist]
            if approach:
                return min(approach) + 1
        return None

    best = None  # ((dist, target_y, target_x, adj_y, adj_x), target, standing)
    for target in candidates:
        tx, ty = target
        for adj in layout.floor_neighbors(tx, ty):
            d = standing_distance(adj)
            if d is None:
                continue
            key = (d, ty, tx, adj[1], adj[0])
            if best is None or key < best[0]:
                best = (key, target, adj)
    if best is None:
        return int(Action.STAY)
    _, target, standing = best

    if standing == me.pos:
        face = _direction_toward(me.pos, target)
        if me.orientation == face:
            return int(Action.INTERACT)
        return face

    # First step on a shortest path to the standing cell, deterministic.
    back = bfs_distances(layout, standing, blocked=others)
    here = back[me.pos]
    step_choice = None
    for nxt in layout.floor_neighbors(*me.pos):
        d = back.get(nxt)
        if d == here - 1:
            key = (nxt[1], nxt[0])
            if step_choice is None or key < step_choice[0]:
                step_choice = (key, nxt)
    if step_choice is None:
        return int(Action.STAY)
    return _direction_toward(me.pos, step_choice[1])


# ---------------------------------------------------------------------------
# REINFORCE with a running-mean baseline.

BASELINE_EMA = 0.99


@dataclass
class Trajectory:
    """Per-seat record of one episode: aligned observation, action and
    reward lists, one entry per tick."""

    observations: list[np.ndarray] = field(default_factory=list)
    actions: list[int] = field(default_factory=list)
    rewards: list[float] = field(default_factory=list)

    def append(self, obs: np.ndarray, action: int, reward: float) -> None:
        self.observations.append(obs)
        self.actions.append(action)
        self.rewards.append(reward)

    def __len__(self) -> int:
        return len(self.actions)


def discounted_returns(rewards: list[float], gamma: float) -> np.ndarray:
    out = np.empty(len(rewards))
    g = 0.0
    for t in range(len(rewards) - 1, -1, -1):
        g = rewards[t] + gamma * g
        out[t] = g
    return out


def reinforce_update(
    params: PolicyParams,
    trajectories: list[Trajectory],
    lr: float,
    gamma: float,
    baseline: float,
) -> tuple[PolicyParams, float]:
    """One policy-gradient ascent step from a batch of trajectories.

    Advantages are discounted returns minus the incoming scalar baseline;
    the gradient of the log-likelihood surrogate is averaged over every
    timestep in the batch, so trajectory order cannot change the update.
    The baseline then moves toward the batch-mean return with coefficient
    0.99.  Returns the updated (params, baseline) pair.
    """
    if params.kind != KIND_LINEAR:
        raise PolicyError("reinforce_update requires linear params")
    trajectories = [t for t in trajectories if len(t)]
    if not trajectories:
        raise PolicyError("need at least one nonempty trajectory")
    feat = params.feature_len
    for traj in trajectories:
        for obs in traj.observations:
            if obs.shape != (feat,):
                raise DimensionMismatch(
                    f"observation length {obs.shape} does not match weights rows {feat}"
                )

    obs_mat = np.concatenate([np.stack(t.observations) for t in trajectories])
    acts = np.concatenate([np.asarray(t.actions, dtype=np.intp) for t in trajectories])
    returns = np.concatenate([discounted_returns(t.rewards, gamma) for t in trajectories])
    advantages = returns - baseline

    probs = softmax(obs_mat @ params.weights)
    direction = -probs
    direction[np.arange(len(acts)), acts] += 1.0
    grad = obs_mat.T @ (direction * advantages[:, None]) / len(acts)
    if not np.isfinite(grad).all():
        raise NonFiniteGradient("gradient contains NaN or Inf; update aborted")

    new_params = linear_params(params.weights + lr * grad)
    new_baseline = BASELINE_EMA * baseline + (1.0 - BASELINE_EMA) * float(returns.mean())
    return new_params, new_baseline


# ---------------------------------------------------------------------------
# Weights files: text table of decimal reals, row-major, or a scripted tag.


def save_weights(params: PolicyParams, path: str | Path) -> None:
    Path(path).write_text(weights_text(params), encoding="utf-8")


def weights_text(params: PolicyParams) -> str:
    if params.kind == KIND_SCRIPTED:
        return f"scripted {params.scripted_name}\n"
    lines = [f"{params.feature_len} cols={NUM_ACTIONS}"]
    for row in params.weights:
        lines.append(" ".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def load_weights(path: str | Path) -> PolicyParams:
    p = Path(path)
    if not p.exists():
        raise MissingWeightsFile(str(p))
    return parse_weights(p.read_text(encoding="utf-8"))


def parse_weights(text: str) -> PolicyParams:
    lines = [ln for ln in text.split("\n") if ln.strip()]
    if not lines:
        raise WeightsFormatError("weights file is empty")
    head = lines[0].split()
    if head[0] == "scripted":
        if len(head) != 2:
            raise WeightsFormatError("scripted weights line must be 'scripted <name>'")
        return scripted_policy(head[1])
    if len(head) != 2 or head[1] != f"cols={NUM_ACTIONS}":
        raise WeightsFormatError(f"bad weights header {lines[0]!r}")
    try:
        feat = int(head[0])
    except ValueError:
        raise WeightsFormatError(f"bad feature length in header {lines[0]!r}") from None
    rows = lines[1:]
    if len(rows) != feat:
        raise WeightsFormatError(f"expected {feat} weight rows, found {len(rows)}")
    data = np.empty((feat, NUM_ACTIONS))
    for i, row in enumerate(rows):
        parts = row.split()
        if len(parts) != NUM_ACTIONS:
            raise WeightsFormatError(f"row {i} has {len(parts)} values, expected {NUM_ACTIONS}")
        try:
            data[i] = [float(v) for v in parts]
        except ValueError:
            raise WeightsFormatError(f"row {i} has a non-numeric value") from None
    return linear_params(data)

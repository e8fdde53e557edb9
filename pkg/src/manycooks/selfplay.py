"""Seeded episode rollouts plus the plain self-play training loop.

Every episode derives its own random generator from integer stream parts,
so batches of episodes can run on any schedule (or any thread count) and
still reproduce bit-for-bit.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .digests import state_digest
from .engine import DEFAULT_CONFIG, EngineConfig, observation_length, reset, step
from .engine import featurize
from .layout import Layout
from .policy import (
    KIND_LINEAR,
    PolicyParams,
    Trajectory,
    action_distribution,
    argmax_action,
    reinforce_update,
    sample_action,
    zero_params,
)
from .replay import ReplayWriter

#: EMA coefficient for the logged mean episode reward.
REWARD_EMA = 0.99


def episode_rng(*parts: int) -> np.random.Generator:
    """Generator derived from integer stream parts, e.g. (seed, episode)."""
    return np.random.default_rng(np.random.SeedSequence(tuple(int(p) for p in parts)))


def derive_seed(*parts: int) -> int:
    """A 63-bit integer seed derived from stream parts."""
    state = np.random.SeedSequence(tuple(int(p) for p in parts)).generate_state(1, np.uint64)
    return int(state[0] >> 1)


@dataclass
class EpisodeResult:
    trajectories: dict[int, Trajectory]
    collective_reward: float
    deliveries: int
    shaped_reward: float = 0.0  # summed shaped bonuses, all seats
    digests: list[str] | None = None


def rollout_episode(
    layout: Layout,
    seat_params: Sequence[PolicyParams],
    horizon: int,
    rng: np.random.Generator,
    config: EngineConfig = DEFAULT_CONFIG,
    *,
    learning_seats: Iterable[int] = (),
    greedy: bool = False,
    collect_digests: bool = False,
    replay_writer: ReplayWriter | None = None,
) -> EpisodeResult:
    """Run one full-horizon episode with one policy per seat.

    Seats act in ascending order each tick.  With ``greedy`` set, every
    policy picks its argmax action (the Random baseline keeps sampling;
    random is its rule).  Trajectories are collected for
    ``learning_seats`` only, with per-tick reward equal to the shared
    reward plus that seat's shaped bonus (zero unless shaping is on).
    """
    n = layout.num_agents
    if len(seat_params) != n:
        raise ValueError(f"got {len(seat_params)} seat policies for {n} seats")
    learning = tuple(sorted(learning_seats))
    state = reset(layout)
    trajectories = {s: Trajectory() for s in learning}
    digests: list[str] | None = [] if collect_digests else None
    collective = 0.0
    shaped_total = 0.0
    deliveries = 0

    for tick in range(horizon):
        actions = [0] * n
        tick_obs: dict[int, np.ndarray] = {}
        for i in range(n):
            params = seat_params[i]
            if params.kind == KIND_LINEAR:
                obs = featurize(state, i, layout, config)
                tick_obs[i] = obs
                probs = action_distribution(params, obs)
                sample = not greedy
            else:
                if i in trajectories:
                    tick_obs[i] = featurize(state, i, layout, config)
                probs = action_distribution(params, None, state=state, seat=i, layout=layout)
                sample = (not greedy) or params.scripted_name == "Random"
            actions[i] = sample_action(probs, rng) if sample else argmax_action(probs)

        outcome = step(state, actions, layout, config)
        for s in learning:
            trajectories[s].append(
                tick_obs[s], actions[s], outcome.shared_reward + outcome.shaped[s]
            )
        state = outcome.next_state
        collective += outcome.shared_reward
        if config.shaping:
            shaped_total += sum(outcome.shaped)
        deliveries = state.deliveries
        if replay_writer is not None:
            replay_writer.record(tick, actions, outcome.shared_reward, state)
        if digests is not None:
            digests.append(state_digest(state))

    return EpisodeResult(
        trajectories=trajectories,
        collective_reward=collective,
        deliveries=deliveries,
        shaped_reward=shaped_total,
        digests=digests,
    )


def snapshot_episodes(total_episodes: int, count: int) -> list[int]:
    """Evenly spaced snapshot points including start and end, e.g.
    3 snapshots over 3000 episodes land at 0, 1500 and 3000."""
    if count < 1:
        raise ValueError("need at least one snapshot")
    if count == 1:
        return [total_episodes]
    points = {round(i * total_episodes / (count - 1)) for i in range(count)}
    return sorted(points)


@dataclass
class Snapshot:
    episode: int
    params: PolicyParams
    reward_ema: float


@dataclass
class SelfPlayResult:
    snapshots: list[Snapshot]
    episode_rewards: list[float]
    episode_training_rewards: list[float]  # collective plus shaped bonuses
    digests: list[list[str]] | None = None


ProgressFn = Callable[[int, float, float], None]


def train_selfplay(
    layout: Layout,
    episodes: int,
    horizon: int,
    lr: float,
    gamma: float,
    seed: int,
    config: EngineConfig = DEFAULT_CONFIG,
    *,
    snapshots: int = 3,
    progress: ProgressFn | None = None,
    collect_digests: bool = False,
) -> SelfPlayResult:
    """Plain self-play: every seat runs the one learning policy, every
    seat's experience feeds the shared-parameter update."""
    n = layout.num_agents
    params = zero_params(observation_length(n))
    baseline = 0.0
    ema = 0.0
    points = set(snapshot_episodes(episodes, snapshots))
    taken: list[Snapshot] = []
    rewards: list[float] = []
    training_rewards: list[float] = []
    digest_log: list[list[str]] | None = [] if collect_digests else None
    started = time.perf_counter()

    for ep in range(episodes):
        if ep in points:
            taken.append(Snapshot(ep, params, ema))
        rng = episode_rng(seed, ep)
        result = rollout_episode(
            layout,
            [params] * n,
            horizon,
            rng,
            config,
            learning_seats=range(n),
            collect_digests=collect_digests,
        )
        params, baseline = reinforce_update(
            params, [result.trajectories[s] for s in range(n)], lr, gamma, baseline
        )
        ema = REWARD_EMA * ema + (1.0 - REWARD_EMA) * result.collective_reward
        rewards.append(result.collective_reward)
        training_rewards.append(result.collective_reward + result.shaped_reward)
        if digest_log is not None:
            digest_log.append(result.digests or [])
        if progress is not None and (ep + 1) % 100 == 0:
            progress(ep + 1, ema, time.perf_counter() - started)

    if episodes in points:
        taken.append(Snapshot(episodes, params, ema))
    return SelfPlayResult(
        snapshots=taken,
        episode_rewards=rewards,
        episode_training_rewards=training_rewards,
        digests=digest_log,
    )

"""Ego-team training with sampled frozen partners.

Each episode places copies of the one learning policy on a uniformly
random subset of seats and fills the remaining seats with independent
draws from a pretrained population.  With zero sampled seats this is
plain self-play, episode for episode.  Only ego-seat experience feeds
the shared-parameter update; partner checkpoints are never modified.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .engine import EngineConfig, observation_length
from .layout import Layout
from .policy import PolicyParams, Trajectory, reinforce_update, zero_params
from .population import Checkpoint, Population, load_population, sample_collaborators
from .replay import ReplayWriter
from .selfplay import (
    EpisodeResult,
    ProgressFn,
    REWARD_EMA,
    episode_rng,
    rollout_episode,
    snapshot_episodes,
)


class ConfigError(ValueError):
    pass


class PopulationRequired(ConfigError):
    pass


@dataclass(frozen=True)
class EgoTrainConfig:
    layout_name: str
    num_agents: int
    num_sampled: int  # partner seats filled from the population each episode
    total_episodes: int
    seed: int
    horizon: int = 400
    lr: float = 0.01
    gamma: float = 0.99
    population_path: str | None = None
    checkpoints_to_save: int = 3
    shaping: bool = False

    def validate(self) -> None:
        if self.num_agents < 2:
            raise ConfigError("num_agents must be >= 2")
        if not 0 <= self.num_sampled <= self.num_agents - 1:
            raise ConfigError("x must satisfy 0 <= x <= n-1")
        if self.num_sampled > 0 and not self.population_path:
            raise PopulationRequired("sampled partner seats need a population path")
        if self.total_episodes < 1:
            raise ConfigError("total_episodes must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")


@dataclass(frozen=True)
class SeatAssignment:
    """Per-episode seat map: ``None`` marks an ego seat, a string is the
    sampled checkpoint id filling that seat."""

    seats: tuple[str | None, ...]

    @property
    def ego_seats(self) -> tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.seats) if s is None)

    @property
    def sampled_seats(self) -> tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.seats) if s is not None)


def assign_seats(
    num_agents: int,
    num_sampled: int,
    pop: Population | None,
    rng: np.random.Generator,
) -> SeatAssignment:
    """Uniformly random ego-seat subset of size N-X; the X remaining seats
    take independent population draws in ascending seat order.  X=0 keeps
    the generator untouched so plain self-play shares its stream."""
    if num_sampled == 0:
        return SeatAssignment((None,) * num_agents)
    if pop is None:
        raise PopulationRequired("sampled partner seats need a population")
    ego = set(int(i) for i in rng.choice(num_agents, size=num_agents - num_sampled, replace=False))
    draws = sample_collaborators(pop, num_sampled, rng)
    seats: list[str | None] = []
    draw_idx = 0
    for seat in range(num_agents):
        if seat in ego:
            seats.append(None)
        else:
            seats.append(draws[draw_idx].id)
            draw_idx += 1
    return SeatAssignment(tuple(seats))


def compose_episode(
    cfg: EgoTrainConfig,
    pop: Population | None,
    rng: np.random.Generator,
) -> SeatAssignment:
    cfg.validate()
    return assign_seats(cfg.num_agents, cfg.num_sampled, pop, rng)


def run_episode(
    assignment: SeatAssignment,
    ego_params: PolicyParams,
    pop: Population | None,
    layout: Layout,
    horizon: int,
    rng: np.random.Generator,
    config: EngineConfig | None = None,
    *,
    greedy: bool = False,
    collect_digests: bool = False,
    replay_writer: ReplayWriter | None = None,
) -> EpisodeResult:
    """Roll one episode under a seat assignment.  Trajectories come back
    for ego seats only; partner experience is discarded."""
    if len(assignment.seats) != layout.num_agents:
        raise ConfigError(
            f"assignment has {len(assignment.seats)} seats, layout {layout.num_agents}"
        )
    if config is None:
        config = EngineConfig(horizon=horizon)
    seat_params = [
        ego_params if s is None else pop.by_id(s).params for s in assignment.seats
    ]
    return rollout_episode(
        layout,
        seat_params,
        horizon,
        rng,
        config,
        learning_seats=assignment.ego_seats,
        greedy=greedy,
        collect_digests=collect_digests,
        replay_writer=replay_writer,
    )


@dataclass
class TrainResult:
    checkpoints: list[Checkpoint]
    population: Population  # ego checkpoints packaged for save_population
    episode_rewards: list[float]
    episode_training_rewards: list[float]
    digests: list[list[str]] | None = None


def train_ego(
    layout: Layout,
    cfg: EgoTrainConfig,
    *,
    population: Population | None = None,
    progress: ProgressFn | None = None,
    collect_digests: bool = False,
) -> TrainResult:
    """Full training loop: compose seats, roll the episode, apply one
    shared-parameter update from the ego trajectories; snapshots are taken
    at evenly spaced episode counts including initialization and end.

    The returned population's manifest seed records the lineage used to
    pick partners during training (the training population's seed when
    partners were sampled, this run's seed otherwise); evaluation uses it
    to enforce that unseen populations come from a different root seed.
    """
    cfg.validate()
    n = layout.num_agents
    if n != cfg.num_agents:
        raise ConfigError(f"layout has {n} seats, config says {cfg.num_agents}")
    if layout.name != cfg.layout_name:
        raise ConfigError(f"layout {layout.name!r} does not match config {cfg.layout_name!r}")
    pop = population
    if cfg.num_sampled > 0:
        if pop is None:
            pop = load_population(cfg.population_path)
        if pop.num_agents != n:
            raise ConfigError(
                f"population built for {pop.num_agents} seats, layout has {n}"
            )

    config = EngineConfig(horizon=cfg.horizon, shaping=cfg.shaping)
    params = zero_params(observation_length(n))
    baseline = 0.0
    ema = 0.0
    points = set(snapshot_episodes(cfg.total_episodes, cfg.checkpoints_to_save))
    checkpoints: list[Checkpoint] = []
    rewards: list[float] = []
    training_rewards: list[float] = []
    digest_log: list[list[str]] | None = [] if collect_digests else None
    started = time.perf_counter()

    def take_snapshot(episode: int) -> None:
        checkpoints.append(
            Checkpoint(
                id=f"ego-ck{len(checkpoints)}",
                params=params,
                run_id="ego",
                training_episodes=episode,
                eval_reward=ema,
                tier=None,
            )
        )

    for ep in range(cfg.total_episodes):
        if ep in points:
            take_snapshot(ep)
        rng = episode_rng(cfg.seed, ep)
        assignment = compose_episode(cfg, pop, rng)
        result = run_episode(
            assignment,
            params,
            pop,
            layout,
            cfg.horizon,
            rng,
            config,
            collect_digests=collect_digests,
        )
        trajectories: list[Trajectory] = [
            result.trajectories[s] for s in assignment.ego_seats
        ]
        params, baseline = reinforce_update(params, trajectories, cfg.lr, cfg.gamma, baseline)
        ema = REWARD_EMA * ema + (1.0 - REWARD_EMA) * result.collective_reward
        rewards.append(result.collective_reward)
        training_rewards.append(result.collective_reward + result.shaped_reward)
        if digest_log is not None:
            digest_log.append(result.digests or [])
        if progress is not None and (ep + 1) % 100 == 0:
            progress(ep + 1, ema, time.perf_counter() - started)

    if cfg.total_episodes in points:
        take_snapshot(cfg.total_episodes)

    lineage_seed = pop.seed if cfg.num_sampled > 0 else cfg.seed
    package = Population(
        checkpoints=checkpoints,
        layout_name=layout.name,
        num_agents=n,
        seed=lineage_seed,
    )
    return TrainResult(
        checkpoints=checkpoints,
        population=package,
        episode_rewards=rewards,
        episode_training_rewards=training_rewards,
        digests=digest_log,
    )

"""Pretrained collaborator populations: build, tier, sample, persist.

A population is a set of frozen policy checkpoints taken from independent
self-play runs at evenly spaced training points, each scored by its mean
self-play reward and labelled Low/Medium/High by global rank.  Directory
format: ``manifest.txt`` plus one weights file per checkpoint under
``weights/``, with an FNV-1a checksum per file recorded in the manifest.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .digests import fnv1a_64
from .engine import DEFAULT_CONFIG, EngineConfig
from .layout import Layout
from .policy import MissingWeightsFile, PolicyParams, load_weights, save_weights
from .selfplay import derive_seed, episode_rng, rollout_episode, train_selfplay

MANIFEST_VERSION = 1
MANIFEST_NAME = "manifest.txt"

TIER_LOW = "Low"
TIER_MEDIUM = "Medium"
TIER_HIGH = "High"
TIERS = (TIER_LOW, TIER_MEDIUM, TIER_HIGH)


class PopulationError(ValueError):
    pass


class TooFewCheckpoints(PopulationError):
    pass


class EmptyPopulation(PopulationError):
    pass


class EvalEpisodesZero(PopulationError):
    pass


class ManifestVersionMismatch(PopulationError):
    pass


class ChecksumMismatch(PopulationError):
    pass


class ManifestFormatError(PopulationError):
    pass


@dataclass(eq=False)
class Checkpoint:
    id: str
    params: PolicyParams
    run_id: str
    training_episodes: int
    eval_reward: float
    tier: str | None = None


@dataclass(eq=False)
class Population:
    checkpoints: list[Checkpoint]
    layout_name: str
    num_agents: int
    seed: int

    def by_id(self, checkpoint_id: str) -> Checkpoint:
        for ck in self.checkpoints:
            if ck.id == checkpoint_id:
                return ck
        raise PopulationError(f"no checkpoint with id {checkpoint_id!r}")


@dataclass(frozen=True)
class TrainConfig:
    """Self-play training knobs for population construction.

    Shaped rewards are on by default here (the sparse delivery signal is
    too thin for the linear learner); checkpoint scores are always
    measured with shaping off.
    """

    episodes: int = 2000
    horizon: int = 400
    lr: float = 0.01
    gamma: float = 0.99
    shaping: bool = True


def assign_tiers(checkpoints: list[Checkpoint]) -> list[Checkpoint]:
    """Rank by (eval_reward, id) ascending and split into Low/Medium/High
    groups as equal as possible, remainders going to the lower tiers.
    Returns new checkpoints in rank order."""
    if len(checkpoints) < 3:
        raise TooFewCheckpoints(f"need at least 3 checkpoints, got {len(checkpoints)}")
    ranked = sorted(checkpoints, key=lambda ck: (ck.eval_reward, ck.id))
    n = len(ranked)
    base, rem = divmod(n, 3)
    sizes = (base + (1 if rem >= 1 else 0), base + (1 if rem >= 2 else 0), base)
    out: list[Checkpoint] = []
    start = 0
    for tier, size in zip(TIERS, sizes):
        for ck in ranked[start : start + size]:
            out.append(replace(ck, tier=tier))
        start += size
    return out


def sample_collaborators(
    pop: Population,
    count: int,
    rng: np.random.Generator,
    *,
    stratified: bool = False,
) -> list[Checkpoint]:
    """``count`` independent draws with replacement, uniform over all
    checkpoints; the stratified mode draws a tier uniformly first."""
    if count < 0:
        raise PopulationError("draw count must be >= 0")
    if count == 0:
        return []
    if not pop.checkpoints:
        raise EmptyPopulation("cannot sample from an empty population")
    draws: list[Checkpoint] = []
    if not stratified:
        size = len(pop.checkpoints)
        for _ in range(count):
            draws.append(pop.checkpoints[int(rng.integers(size))])
        return draws
    by_tier = {tier: [ck for ck in pop.checkpoints if ck.tier == tier] for tier in TIERS}
    if any(not members for members in by_tier.values()):
        raise PopulationError("stratified sampling needs a non-empty member list per tier")
    for _ in range(count):
        members = by_tier[TIERS[int(rng.integers(3))]]
        draws.append(members[int(rng.integers(len(members)))])
    return draws


def measure_selfplay_reward(
    params: PolicyParams,
    layout: Layout,
    episodes: int,
    seed_parts: tuple[int, ...],
    config: EngineConfig,
) -> float:
    """Mean collective reward over sampled self-play episodes, shaping off."""
    eval_config = replace(config, shaping=False)
    n = layout.num_agents
    total = 0.0
    for ep in range(episodes):
        rng = episode_rng(*seed_parts, ep)
        result = rollout_episode(layout, [params] * n, config.horizon, rng, eval_config)
        total += result.collective_reward
    return total / episodes


def build_population(
    layout: Layout,
    num_runs: int,
    checkpoints_per_run: int,
    train_config: TrainConfig,
    eval_episodes: int,
    seed: int,
    *,
    threads: int = 1,
) -> Population:
    """Independent self-play runs with distinct derived seeds; per run,
    parameters are snapshotted at evenly spaced training points including
    initialization and end, scored by self-play reward, then tiered."""
    if num_runs < 1:
        raise PopulationError("num_runs must be >= 1")
    if checkpoints_per_run < 2:
        raise PopulationError("checkpoints_per_run must be >= 2")
    if eval_episodes < 1:
        raise EvalEpisodesZero("eval_episodes must be >= 1")

    config = EngineConfig(horizon=train_config.horizon, shaping=train_config.shaping)

    def one_run(run_idx: int) -> list[Checkpoint]:
        run_seed = derive_seed(seed, run_idx)
        result = train_selfplay(
            layout,
            train_config.episodes,
            train_config.horizon,
            train_config.lr,
            train_config.gamma,
            run_seed,
            config,
            snapshots=checkpoints_per_run,
        )
        checkpoints = []
        for ck_idx, snap in enumerate(result.snapshots):
            reward = measure_selfplay_reward(
                snap.params, layout, eval_episodes, (seed, run_idx, ck_idx), config
            )
            checkpoints.append(
                Checkpoint(
                    id=f"run{run_idx}-ck{ck_idx}",
                    params=snap.params,
                    run_id=f"run{run_idx}",
                    training_episodes=snap.episode,
                    eval_reward=reward,
                    tier=None,
                )
            )
        return checkpoints

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_run = list(pool.map(one_run, range(num_runs)))
    else:
        per_run = [one_run(i) for i in range(num_runs)]

    all_checkpoints = [ck for run in per_run for ck in run]
    # Tier labels need at least three checkpoints; smaller builds stay untiered.
    if len(all_checkpoints) >= 3:
        all_checkpoints = assign_tiers(all_checkpoints)
    return Population(
        checkpoints=all_checkpoints,
        layout_name=layout.name,
        num_agents=layout.num_agents,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# Persistence.


def _weights_relpath(checkpoint_id: str) -> str:
    return f"weights/{checkpoint_id}.txt"


def save_population(pop: Population, directory: str | Path) -> None:
    directory = Path(directory)
    (directory / "weights").mkdir(parents=True, exist_ok=True)
    seen: set[str] = set()
    lines = [
        f"version {MANIFEST_VERSION}",
        f"layout {pop.layout_name}",
        f"n {pop.num_agents}",
        f"seed {pop.seed}",
    ]
    for ck in pop.checkpoints:
        if ck.id in seen:
            raise PopulationError(f"duplicate checkpoint id {ck.id!r}")
        if any(c.isspace() or c == "=" for c in ck.id):
            raise PopulationError(f"checkpoint id {ck.id!r} contains reserved characters")
        seen.add(ck.id)
        rel = _weights_relpath(ck.id)
        weights_path = directory / rel
        save_weights(ck.params, weights_path)
        checksum = fnv1a_64(weights_path.read_bytes())
        lines.append(
            "checkpoint "
            f"id={ck.id} run_id={ck.run_id} training_episodes={ck.training_episodes} "
            f"eval_reward={float(ck.eval_reward)!r} tier={ck.tier or '-'} "
            f"weights={rel} checksum={checksum:016x}"
        )
    (directory / MANIFEST_NAME).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _parse_kv(line: str, prefix: str) -> dict[str, str]:
    fields = {}
    for part in line[len(prefix) :].split():
        if "=" not in part:
            raise ManifestFormatError(f"bad manifest field {part!r}")
        key, value = part.split("=", 1)
        fields[key] = value
    return fields


def load_population(directory: str | Path) -> Population:
    directory = Path(directory)
    manifest = directory / MANIFEST_NAME
    if not manifest.exists():
        raise ManifestFormatError(f"no {MANIFEST_NAME} in {directory}")
    lines = [ln for ln in manifest.read_text(encoding="utf-8").split("\n") if ln]
    if not lines or not lines[0].startswith("version "):
        raise ManifestFormatError("manifest must start with a version line")
    if lines[0] != f"version {MANIFEST_VERSION}":
        raise ManifestVersionMismatch(
            f"manifest {lines[0]!r}, expected version {MANIFEST_VERSION}"
        )
    header: dict[str, str] = {}
    checkpoints: list[Checkpoint] = []
    for line in lines:
        if line.startswith("checkpoint "):
            fields = _parse_kv(line, "checkpoint ")
            try:
                ck_id = fields["id"]
                rel = fields["weights"]
                expected = int(fields["checksum"], 16)
                tier = fields["tier"]
                training_episodes = int(fields["training_episodes"])
                eval_reward = float(fields["eval_reward"])
                run_id = fields["run_id"]
            except KeyError as exc:
                raise ManifestFormatError(f"manifest entry missing field {exc.args[0]}") from None
            weights_path = directory / rel
            if not weights_path.exists():
                raise MissingWeightsFile(f"checkpoint {ck_id!r}: missing {rel}")
            raw = weights_path.read_bytes()
            if fnv1a_64(raw) != expected:
                raise ChecksumMismatch(f"checkpoint {ck_id!r}: checksum mismatch for {rel}")
            checkpoints.append(
                Checkpoint(
                    id=ck_id,
                    params=load_weights(weights_path),
                    run_id=run_id,
                    training_episodes=training_episodes,
                    eval_reward=eval_reward,
                    tier=None if tier == "-" else tier,
                )
            )
        else:
            key, _, value = line.partition(" ")
            header[key] = value
    for required in ("layout", "n", "seed"):
        if required not in header:
            raise ManifestFormatError(f"manifest missing {required!r} line")
    ids = [ck.id for ck in checkpoints]
    if len(set(ids)) != len(ids):
        raise ManifestFormatError("manifest has duplicate checkpoint ids")
    if not checkpoints:
        raise EmptyPopulation(f"manifest in {directory} lists no checkpoints")
    return Population(
        checkpoints=checkpoints,
        layout_name=header["layout"],
        num_agents=int(header["n"]),
        seed=int(header["seed"]),
    )
"""Cross-play evaluation: ego checkpoints against a held-out population,
swept over the number of sampled (unseen) seats.

Every episode derives its generator from (cell seed, episode index), so
cells and episodes can be scheduled on any number of threads without
changing a single number.  Shaping is always off here and the ego policy
acts greedily, so per-cell spread reflects team composition only.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .engine import EngineConfig
from .layout import Layout
from .policy import PolicyParams
from .population import Population
from .selfplay import derive_seed, episode_rng, rollout_episode
from .training import assign_seats


class EvalError(ValueError):
    pass


class SeedCollision(EvalError):
    """The unseen population shares its root seed with the ego's lineage."""


@dataclass(frozen=True)
class EvalRow:
    layout_name: str
    num_agents: int
    num_sampled: int
    ratio: float  # num_sampled / num_agents
    mean_reward: float
    std_reward: float
    episodes: int


@dataclass
class EvalReport:
    rows: list[EvalRow]


@dataclass(frozen=True)
class EvalConfig:
    layout: Layout
    ego: PolicyParams
    unseen: Population
    x_values: tuple[int, ...]
    seed: int
    episodes_per_cell: int = 100
    horizon: int = 400
    ego_lineage_seed: int | None = None


def evaluate_cell(
    ego: PolicyParams,
    pop: Population | None,
    layout: Layout,
    num_sampled: int,
    episodes: int,
    seed: int,
    horizon: int = 400,
    *,
    ego_lineage_seed: int | None = None,
) -> EvalRow:
    """Mean and standard deviation of collective reward over ``episodes``
    full-horizon episodes with a fresh seat assignment each episode."""
    n = layout.num_agents
    if not 0 <= num_sampled <= n - 1:
        raise EvalError("x must satisfy 0 <= x <= n-1")
    if episodes < 1:
        raise EvalError("episodes must be >= 1")
    if (
        ego_lineage_seed is not None
        and pop is not None
        and ego_lineage_seed == pop.seed
    ):
        raise SeedCollision(
            f"unseen population seed {pop.seed} matches the ego lineage seed"
        )
    config = EngineConfig(horizon=horizon, shaping=False)
    rewards = np.empty(episodes)
    for ep in range(episodes):
        rng = episode_rng(seed, ep)
        assignment = assign_seats(n, num_sampled, pop, rng)
        seat_params = [
            ego if s is None else pop.by_id(s).params for s in assignment.seats
        ]
        result = rollout_episode(
            layout, seat_params, horizon, rng, config, greedy=True
        )
        rewards[ep] = result.collective_reward
    return EvalRow(
        layout_name=layout.name,
        num_agents=n,
        num_sampled=num_sampled,
        ratio=num_sampled / n,
        mean_reward=float(rewards.mean()),
        std_reward=float(rewards.std()),
        episodes=episodes,
    )


def ratio_sweep(cfg: EvalConfig, *, threads: int = 1) -> EvalReport:
    """One cell per sampled-seat count, rows ordered by that count; each
    cell runs from its own derived seed."""
    x_values = sorted(cfg.x_values)
    if (
        cfg.ego_lineage_seed is not None
        and cfg.ego_lineage_seed == cfg.unseen.seed
        and any(x > 0 for x in x_values)
    ):
        raise SeedCollision(
            f"unseen population seed {cfg.unseen.seed} matches the ego lineage seed"
        )

    def one_cell(item: tuple[int, int]) -> EvalRow:
        index, x = item
        return evaluate_cell(
            cfg.ego,
            cfg.unseen,
            cfg.layout,
            x,
            cfg.episodes_per_cell,
            derive_seed(cfg.seed, index),
            cfg.horizon,
        )

    items = list(enumerate(x_values))
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one_cell, items))
    else:
        rows = [one_cell(item) for item in items]
    return EvalReport(rows=rows)


# ---------------------------------------------------------------------------
# Report serialization: csv for plotting, structured text that round-trips.

CSV_HEADER = "layout,n,x,ratio,mean_reward,std_reward,episodes"
TEXT_HEADER = "evalreport version 1"


class ReportFormatError(ValueError):
    pass


def _check_name(name: str) -> str:
    if any(c.isspace() or c in "=," for c in name):
        raise ReportFormatError(f"layout name {name!r} not serializable")
    return name


def emit_report(report: EvalReport, fmt: str = "csv") -> bytes:
    """Deterministic bytes; ratios render to four decimals, rewards keep
    full precision via repr."""
    if fmt == "csv":
        lines = [CSV_HEADER]
        for r in report.rows:
            lines.append(
                f"{_check_name(r.layout_name)},{r.num_agents},{r.num_sampled},"
                f"{r.ratio:.4f},{float(r.mean_reward)!r},{float(r.std_reward)!r},{r.episodes}"
            )
        return ("\n".join(lines) + "\n").encode("utf-8")
    if fmt == "text":
        lines = [TEXT_HEADER]
        for r in report.rows:
            lines.append(
                f"row layout={_check_name(r.layout_name)} n={r.num_agents} "
                f"x={r.num_sampled} episodes={r.episodes} "
                f"mean_reward={float(r.mean_reward)!r} std_reward={float(r.std_reward)!r}"
            )
        return ("\n".join(lines) + "\n").encode("utf-8")
    raise ReportFormatError(f"unknown report format {fmt!r}")


def load_report(data: bytes | str) -> EvalReport:
    """Load the structured-text form; ratios are recomputed exactly."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    lines = [ln for ln in text.split("\n") if ln]
    if not lines or lines[0] != TEXT_HEADER:
        raise ReportFormatError("not a structured-text eval report")
    rows = []
    for line in lines[1:]:
        if not line.startswith("row "):
            raise ReportFormatError(f"unexpected line {line!r}")
        fields = {}
        for part in line[4:].split():
            if "=" not in part:
                raise ReportFormatError(f"bad field {part!r}")
            key, value = part.split("=", 1)
            fields[key] = value
        try:
            n = int(fields["n"])
            x = int(fields["x"])
            rows.append(
                EvalRow(
                    layout_name=fields["layout"],
                    num_agents=n,
                    num_sampled=x,
                    ratio=x / n,
                    mean_reward=float(fields["mean_reward"]),
                    std_reward=float(fields["std_reward"]),
                    episodes=int(fields["episodes"]),
                )
            )
        except KeyError as exc:
            raise ReportFormatError(f"row missing field {exc.args[0]}") from None
    return EvalReport(rows=rows)

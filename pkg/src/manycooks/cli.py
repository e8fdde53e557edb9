"""Command-line entry point.

Subcommands: ``population`` (build a collaborator population), ``train``
(ego-team training), ``eval`` (cross-play sweep), ``replay`` (render a
replay file as ASCII frames), ``validate-layout``.  Exit codes: 0 on
success, 1 on a domain error with a one-line diagnostic, 2 on usage
errors.  All results are deterministic under ``--seed``; ``--threads``
affects wallclock only.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .engine import EngineConfig, GameState, reset, step
from .evaluate import EvalConfig, emit_report, ratio_sweep
from .layout import Layout, LayoutError, Tile, check_reachability, load_layout_file
from .policy import PolicyError
from .population import (
    PopulationError,
    TrainConfig,
    build_population,
    load_population,
    save_population,
)
from .replay import DigestMismatch, ReplayFormatError, load_replay
from .training import ConfigError, EgoTrainConfig, train_ego
from .digests import state_digest

DOMAIN_ERRORS = (
    LayoutError,
    PolicyError,
    PopulationError,
    ReplayFormatError,
    DigestMismatch,
    ConfigError,
    ValueError,
    OSError,
)

ORIENTATION_GLYPHS = "^v><"  # North, South, East, West
HELD_GLYPHS = ("", "o", "d", "s")
CELL_WIDTH = 5

_STATIC_GLYPHS = {
    Tile.FLOOR: "",
    Tile.COUNTER: "X",
    Tile.POT: "P",
    Tile.ONION_DISPENSER: "O",
    Tile.DISH_DISPENSER: "D",
    Tile.SERVING_STATION: "S",
}


def render_frame(state: GameState, layout: Layout) -> str:
    """Fixed-width ASCII frame: agents as seat digit plus orientation and
    held-object glyphs, pots annotated ``P{onions}/{ticks}``, counters
    show their object.  Every cell renders in 5 columns; every row ends
    with a newline."""
    cells = []
    for y in range(layout.height):
        for x in range(layout.width):
            tile = layout.tile_at(x, y)
            if tile == Tile.POT:
                pot = state.pots[(x, y)]
                cells.append(f"P{pot.onions}/{pot.ticks_remaining}")
            elif tile == Tile.COUNTER:
                obj = state.counters.get((x, y))
                cells.append("X" + (HELD_GLYPHS[obj] if obj else ""))
            else:
                cells.append(_STATIC_GLYPHS[tile])
    for seat, agent in enumerate(state.agents):
        x, y = agent.pos
        cells[y * layout.width + x] = (
            f"{seat + 1}{ORIENTATION_GLYPHS[agent.orientation]}{HELD_GLYPHS[agent.held]}"
        )
    rows = []
    for y in range(layout.height):
        row = "".join(
            cells[y * layout.width + x].ljust(CELL_WIDTH) for x in range(layout.width)
        )
        rows.append(row + "\n")
    return "".join(rows)


def _echo_config(args: argparse.Namespace) -> None:
    if getattr(args, "quiet", False):
        return
    resolved = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    print(f"config: {json.dumps(resolved, sort_keys=True, default=str)}")


def _progress_printer(quiet: bool):
    if quiet:
        return None

    def progress(episode: int, ema: float, wallclock: float) -> None:
        print(f"episode {episode} mean_reward_ema {ema:.3f} wallclock {wallclock:.1f}s")

    return progress


def _cmd_validate_layout(args: argparse.Namespace) -> int:
    layout = load_layout_file(args.path)
    findings = check_reachability(layout)
    if findings:
        for finding in findings:
            print(str(finding))
        return 1
    if not args.quiet:
        print(f"{layout.name}: ok ({layout.num_agents} seats, {layout.width}x{layout.height})")
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    replay = load_replay(args.path)
    layout = replay.layout
    state = reset(layout)
    delay = 1.0 / args.fps if args.fps else 0.0
    for record in replay.ticks:
        outcome = step(state, list(record.actions), layout, replay.config)
        state = outcome.next_state
        digest = state_digest(state)
        if digest != record.digest:
            raise DigestMismatch(
                f"tick {record.tick}: digest {digest} != recorded {record.digest}"
            )
        if not args.quiet:
            print(f"tick {record.tick} reward {record.shared_reward}")
            print(render_frame(state, layout), end="")
            if delay:
                time.sleep(delay)
    if not args.quiet:
        print(f"replay ok: {len(replay.ticks)} ticks, score {state.score}")
    return 0


def _cmd_population(args: argparse.Namespace) -> int:
    layout = load_layout_file(args.layout)
    train_config = TrainConfig(
        episodes=args.episodes,
        horizon=args.horizon,
        lr=args.lr,
        gamma=args.gamma,
        shaping=not args.no_shaping,
    )
    pop = build_population(
        layout,
        num_runs=args.runs,
        checkpoints_per_run=args.checkpoints,
        train_config=train_config,
        eval_episodes=args.eval_episodes,
        seed=args.seed,
        threads=args.threads,
    )
    save_population(pop, args.out)
    if not args.quiet:
        for ck in pop.checkpoints:
            print(
                f"checkpoint {ck.id} episodes {ck.training_episodes} "
                f"reward {ck.eval_reward:.2f} tier {ck.tier}"
            )
        print(f"saved {len(pop.checkpoints)} checkpoints to {args.out}")
    return 0


def _cmd_train(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if not 0 <= args.x <= args.n - 1:
        parser.error("x must satisfy 0 <= x <= n-1")
    if args.x > 0 and not args.population:
        parser.error("--population is required when x > 0")
    layout = load_layout_file(args.layout)
    cfg = EgoTrainConfig(
        layout_name=layout.name,
        num_agents=args.n,
        num_sampled=args.x,
        total_episodes=args.episodes,
        seed=args.seed,
        horizon=args.horizon,
        lr=args.lr,
        gamma=args.gamma,
        population_path=args.population,
        checkpoints_to_save=args.checkpoints,
        shaping=args.shaping,
    )
    result = train_ego(layout, cfg, progress=_progress_printer(args.quiet))
    save_population(result.population, args.out)
    if not args.quiet:
        print(f"saved {len(result.checkpoints)} ego checkpoints to {args.out}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    layout = load_layout_file(args.layout)
    if layout.num_agents != args.n:
        raise ConfigError(f"layout has {layout.num_agents} seats, --n says {args.n}")
    ego_pop = load_population(args.ego)
    ego = ego_pop.by_id(args.ego_id) if args.ego_id else ego_pop.checkpoints[-1]
    unseen = load_population(args.population)
    x_values = tuple(int(v) for v in args.x.split(","))
    cfg = EvalConfig(
        layout=layout,
        ego=ego.params,
        unseen=unseen,
        x_values=x_values,
        seed=args.seed,
        episodes_per_cell=args.episodes,
        horizon=args.horizon,
        ego_lineage_seed=ego_pop.seed,
    )
    report = ratio_sweep(cfg, threads=args.threads)
    fmt = args.format
    if fmt == "auto":
        fmt = "csv" if args.out.endswith(".csv") else "text"
    data = emit_report(report, fmt)
    Path(args.out).write_bytes(data)
    if not args.quiet:
        for row in report.rows:
            print(
                f"x {row.num_sampled} ratio {row.ratio:.4f} "
                f"mean {row.mean_reward:.2f} std {row.std_reward:.2f}"
            )
        print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="manycooks",
        description="Deterministic N-seat kitchen simulator: population building, "
        "ego-team training, cross-play evaluation, replays.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--quiet", action="store_true", help="suppress log output")
    common.add_argument("--threads", type=int, default=1, help="worker threads (results unchanged)")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-layout", parents=[common], help="check a .layout file")
    p.add_argument("path")
    p.set_defaults(func=_cmd_validate_layout)

    p = sub.add_parser("replay", parents=[common], help="render a replay file")
    p.add_argument("path")
    p.add_argument("--fps", type=float, default=0.0, help="frames per second (0 = no delay)")
    p.set_defaults(func=_cmd_replay)

    p = sub.add_parser("population", parents=[common], help="build a collaborator population")
    p.add_argument("--layout", required=True)
    p.add_argument("--runs", type=int, default=4)
    p.add_argument("--checkpoints", type=int, default=3)
    p.add_argument("--episodes", type=int, default=2000, help="training episodes per run")
    p.add_argument("--eval-episodes", type=int, default=20)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--horizon", type=int, default=400)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--gamma", type=float, default=0.99)
    p.add_argument("--no-shaping", action="store_true", help="train without shaped rewards")
    p.set_defaults(func=_cmd_population)

    p = sub.add_parser("train", parents=[common], help="train an ego-team policy")
    p.add_argument("--layout", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--x", type=int, required=True, help="sampled partner seats per episode")
    p.add_argument("--episodes", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--population", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--horizon", type=int, default=400)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--gamma", type=float, default=0.99)
    p.add_argument("--checkpoints", type=int, default=3)
    p.add_argument("--shaping", action="store_true", help="train with shaped rewards")
    train_parser = p
    p.set_defaults(func=lambda args: _cmd_train(args, train_parser))

    p = sub.add_parser("eval", parents=[common], help="cross-play ratio sweep")
    p.add_argument("--ego", required=True, help="ego checkpoint directory")
    p.add_argument("--ego-id", default=None, help="checkpoint id (default: last)")
    p.add_argument("--population", required=True, help="unseen population directory")
    p.add_argument("--layout", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--x", required=True, help="comma-separated sampled-seat counts")
    p.add_argument("--episodes", type=int, default=100)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--horizon", type=int, default=400)
    p.add_argument("--format", choices=("auto", "csv", "text"), default="auto")
    p.set_defaults(func=_cmd_eval)

    return parser


def run_command(argv: list[str]) -> int:
    """Dispatch one CLI invocation; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        return int(exit_.code or 0)
    _echo_config(args)
    try:
        return args.func(args)
    except SystemExit as exit_:
        return int(exit_.code or 0)
    except DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> int:
    return run_command(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())

"""Replay files: newline-delimited JSON, one record per tick.

The header record carries the layout text and engine config; every tick
record carries the joint actions (one symbol per seat, ``NSEW.I``), the
shared reward and the post-step state digest.  Byte output is
deterministic for equal inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .digests import state_digest
from .engine import ACTION_SYMBOLS, EngineConfig, GameState
from .layout import Layout, parse_layout, render_layout

REPLAY_VERSION = 1

_ACTION_INDEX = {s: i for i, s in enumerate(ACTION_SYMBOLS)}


class ReplayFormatError(ValueError):
    pass


class DigestMismatch(ValueError):
    """A re-simulated state digest differs from the recorded one."""


@dataclass
class TickRecord:
    tick: int
    actions: tuple[int, ...]
    shared_reward: float
    digest: str


@dataclass
class Replay:
    layout: Layout
    config: EngineConfig
    ticks: list[TickRecord]


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def encode_actions(actions) -> str:
    return "".join(ACTION_SYMBOLS[a] for a in actions)


def decode_actions(text: str) -> tuple[int, ...]:
    try:
        return tuple(_ACTION_INDEX[c] for c in text)
    except KeyError as exc:
        raise ReplayFormatError(f"unknown action symbol {exc.args[0]!r}") from None


def header_line(layout: Layout, config: EngineConfig) -> str:
    return _dump(
        {
            "kind": "header",
            "version": REPLAY_VERSION,
            "layout_name": layout.name,
            "layout": render_layout(layout),
            "config": {
                "cook_time": config.cook_time,
                "delivery_reward": config.delivery_reward,
                "horizon": config.horizon,
                "shaping": config.shaping,
            },
        }
    )


def tick_line(tick: int, actions, shared_reward: float, state: GameState) -> str:
    return _dump(
        {
            "kind": "tick",
            "tick": tick,
            "actions": encode_actions(actions),
            "reward": shared_reward,
            "digest": state_digest(state),
        }
    )


class ReplayWriter:
    """Accumulates replay lines; write with :meth:`save` or join via :meth:`text`."""

    def __init__(self, layout: Layout, config: EngineConfig):
        self._lines = [header_line(layout, config)]

    def record(self, tick: int, actions, shared_reward: float, state: GameState) -> None:
        self._lines.append(tick_line(tick, actions, shared_reward, state))

    def text(self) -> str:
        return "\n".join(self._lines) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.text(), encoding="utf-8")


def load_replay(path: str | Path) -> Replay:
    text = Path(path).read_text(encoding="utf-8")
    return parse_replay(text)


def parse_replay(text: str) -> Replay:
    lines = [line for line in text.split("\n") if line]
    if not lines:
        raise ReplayFormatError("replay file is empty")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ReplayFormatError(f"bad header line: {exc}") from None
    if header.get("kind") != "header":
        raise ReplayFormatError("first record is not a header")
    if header.get("version") != REPLAY_VERSION:
        raise ReplayFormatError(f"unsupported replay version {header.get('version')!r}")
    layout = parse_layout(header["layout"], name=header.get("layout_name", "replay"))
    cfg = header["config"]
    config = EngineConfig(
        cook_time=cfg["cook_time"],
        delivery_reward=cfg["delivery_reward"],
        horizon=cfg["horizon"],
        shaping=cfg["shaping"],
    )
    ticks = []
    for line in lines[1:]:
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ReplayFormatError(f"bad tick line: {exc}") from None
        if rec.get("kind") != "tick":
            raise ReplayFormatError(f"unexpected record kind {rec.get('kind')!r}")
        ticks.append(
            TickRecord(
                tick=rec["tick"],
                actions=decode_actions(rec["actions"]),
                shared_reward=rec["reward"],
                digest=rec["digest"],
            )
        )
    return Replay(layout=layout, config=config, ticks=ticks)

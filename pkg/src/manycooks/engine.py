"""Deterministic N-agent kitchen state machine.

Each tick applies three phases: movement with conservative conflict
resolution, interactions in ascending seat order, then pot cooking.
``step`` and ``featurize`` are pure functions; states are treated as
immutable values and may be shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import NamedTuple

import numpy as np

from .layout import Layout, Tile


class Orientation(IntEnum):
    NORTH = 0
    SOUTH = 1
    EAST = 2
    WEST = 3


#: Unit cell offset per orientation; y grows downward (south).
ORIENTATION_OFFSETS = ((0, -1), (0, 1), (1, 0), (-1, 0))


class HeldObject(IntEnum):
    NOTHING = 0
    ONION = 1
    DISH = 2
    SOUP = 3


class Action(IntEnum):
    NORTH = 0
    SOUTH = 1
    EAST = 2
    WEST = 3
    STAY = 4
    INTERACT = 5


NUM_ACTIONS = 6

#: One-character action codes used in replay files, index-aligned with Action.
ACTION_SYMBOLS = "NSEW.I"


class PotPhase(IntEnum):
    IDLE = 0
    COOKING = 1
    READY = 2


POT_CAPACITY = 3


class EngineError(ValueError):
    pass


class ActionCountMismatch(EngineError):
    pass


class SeatOutOfRange(EngineError):
    pass


@dataclass(frozen=True)
class EngineConfig:
    """Tunable constants; defaults follow the common two-seat conventions."""

    cook_time: int = 20
    delivery_reward: int = 20
    horizon: int = 400
    shaping: bool = False
    shaped_onion_in_pot: float = 3.0
    shaped_dish_pickup: float = 3.0
    shaped_soup_pickup: float = 5.0


DEFAULT_CONFIG = EngineConfig()


@dataclass(slots=True)
class AgentState:
    pos: tuple[int, int]
    orientation: int
    held: int


@dataclass(slots=True, frozen=True)
class PotState:
    onions: int
    phase: int
    ticks_remaining: int


IDLE_POT = PotState(0, PotPhase.IDLE, 0)


@dataclass(slots=True)
class GameState:
    tick: int
    agents: tuple[AgentState, ...]
    pots: dict[tuple[int, int], PotState]
    counters: dict[tuple[int, int], int]
    deliveries: int
    score: int


class Event(NamedTuple):
    kind: str
    seat: int
    obj: int | None = None


EVENT_DELIVERED = "delivered"
EVENT_POT_STARTED = "pot_started"
EVENT_PICKED_UP = "picked_up"
EVENT_PLACED_IN_POT = "placed_in_pot"
EVENT_PLACED_ON_COUNTER = "placed_on_counter"
EVENT_TOOK_FROM_COUNTER = "took_from_counter"


@dataclass(slots=True)
class StepOutcome:
    next_state: GameState
    shared_reward: float
    shaped: list[float]
    events: list[Event]


def reset(layout: Layout) -> GameState:
    """Initial state: agents at their start cells facing north holding
    nothing, all pots idle and empty, counters clear."""
    agents = tuple(
        AgentState(pos, int(Orientation.NORTH), int(HeldObject.NOTHING))
        for pos in layout.start_positions
    )
    pots = {cell: IDLE_POT for cell in layout.pot_cells}
    return GameState(tick=0, agents=agents, pots=pots, counters={}, deliveries=0, score=0)


def step(
    state: GameState,
    actions: list[int],
    layout: Layout,
    config: EngineConfig = DEFAULT_CONFIG,
) -> StepOutcome:
    """Advance one tick.  Fully deterministic; raises ActionCountMismatch
    when the action list length differs from the seat count.

    Movement conflicts resolve conservatively: a cell proposed by two or
    more agents blocks all of them, position swaps block both sides, and
    an agent only moves once its target cell is known to be vacated, so
    movement cycles stall rather than rotate.
    """
    agents = state.agents
    n = len(agents)
    if len(actions) != n:
        raise ActionCountMismatch(f"got {len(actions)} actions for {n} seats")

    width = layout.width
    passable = layout.passable
    tiles = layout.grid

    # Phase 1: movement proposals as flat cell indices (-1 = no proposal).
    positions = [0] * n
    orients = [0] * n
    targets = [-1] * n
    any_proposal = False
    has_interact = False
    for i in range(n):
        a = agents[i]
        px, py = a.pos
        pidx = py * width + px
        positions[i] = pidx
        act = actions[i]
        if act < 4:
            orients[i] = act
            if act == 0:
                t = pidx - width
            elif act == 1:
                t = pidx + width
            elif act == 2:
                t = pidx + 1
            else:
                t = pidx - 1
            if passable[t]:
                targets[i] = t
                any_proposal = True
        else:
            orients[i] = a.orientation
            if act == 5:
                has_interact = True

    moved = [False] * n
    if any_proposal:
        # A cell proposed by >= 2 agents blocks all of them.
        for i in range(n):
            ti = targets[i]
            if ti < 0:
                continue
            clash = False
            for j in range(i + 1, n):
                if targets[j] == ti:
                    targets[j] = -1
                    clash = True
            if clash:
                targets[i] = -1

        # Confirm movers to a least fixed point: an agent moves only when
        # its target is empty or occupied by an already-confirmed mover.
        # Swap pairs and movement cycles never confirm, so they block.
        occupant = {positions[i]: i for i in range(n)}
        changed = True
        while changed:
            changed = False
            for i in range(n):
                if moved[i] or targets[i] < 0:
                    continue
                j = occupant.get(targets[i], -1)
                if j < 0 or moved[j]:
                    moved[i] = True
                    changed = True

    # Phase 2: interactions, ascending seat order.
    pots = state.pots
    counters = state.counters
    events: list[Event] = []
    shaped = [0.0] * n
    deliveries_now = 0
    held: list[int] | None = None

    if has_interact:
        held = [a.held for a in agents]
        pots_copied = False
        counters_copied = False
        shaping = config.shaping
        for i in range(n):
            if actions[i] != 5:
                continue
            cidx = targets[i] if moved[i] else positions[i]
            o = orients[i]
            if o == 0:
                fidx = cidx - width
            elif o == 1:
                fidx = cidx + width
            elif o == 2:
                fidx = cidx + 1
            else:
                fidx = cidx - 1
            tile = tiles[fidx]
            if tile == 0:
                continue
            h = held[i]
            if tile == 3:  # onion dispenser
                if h == 0:
                    held[i] = 1
                    events.append(Event(EVENT_PICKED_UP, i, 1))
            elif tile == 4:  # dish dispenser
                if h == 0:
                    held[i] = 2
                    events.append(Event(EVENT_PICKED_UP, i, 2))
                    if shaping:
                        shaped[i] += config.shaped_dish_pickup
            elif tile == 2:  # pot
                cell = (fidx % width, fidx // width)
                pot = pots[cell]
                if h == 1 and pot.phase == 0:
                    if not pots_copied:
                        pots = dict(pots)
                        pots_copied = True
                    onions = pot.onions + 1
                    held[i] = 0
                    events.append(Event(EVENT_PLACED_IN_POT, i, 1))
                    if onions == POT_CAPACITY:
                        pots[cell] = PotState(onions, 1, config.cook_time)
                        events.append(Event(EVENT_POT_STARTED, i))
                    else:
                        pots[cell] = PotState(onions, 0, 0)
                    if shaping:
                        shaped[i] += config.shaped_onion_in_pot
                elif h == 2 and pot.phase == 2:
                    if not pots_copied:
                        pots = dict(pots)
                        pots_copied = True
                    pots[cell] = IDLE_POT
                    held[i] = 3
                    events.append(Event(EVENT_PICKED_UP, i, 3))
                    if shaping:
                        shaped[i] += config.shaped_soup_pickup
            elif tile == 5:  # serving station
                if h == 3:
                    held[i] = 0
                    deliveries_now += 1
                    events.append(Event(EVENT_DELIVERED, i, 3))
            else:  # counter
                cell = (fidx % width, fidx // width)
                current = counters.get(cell)
                if current is None:
                    if h != 0:
                        if not counters_copied:
                            counters = dict(counters)
                            counters_copied = True
                        counters[cell] = h
                        held[i] = 0
                        events.append(Event(EVENT_PLACED_ON_COUNTER, i, h))
                elif h == 0:
                    if not counters_copied:
                        counters = dict(counters)
                        counters_copied = True
                    del counters[cell]
                    held[i] = current
                    events.append(Event(EVENT_TOOK_FROM_COUNTER, i, current))

    # Phase 3: cooking.
    for pot in pots.values():
        if pot.phase == 1:
            cooked = dict(pots) if pots is state.pots else pots
            for cell, p in cooked.items():
                if p.phase == 1:
                    t = p.ticks_remaining - 1
                    if t == 0:
                        cooked[cell] = PotState(POT_CAPACITY, 2, 0)
                    else:
                        cooked[cell] = PotState(POT_CAPACITY, 1, t)
            pots = cooked
            break

    new_agents_list = []
    for i in range(n):
        a = agents[i]
        h = a.held if held is None else held[i]
        if moved[i]:
            t = targets[i]
            new_agents_list.append(AgentState((t % width, t // width), orients[i], h))
        elif orients[i] != a.orientation or h != a.held:
            new_agents_list.append(AgentState(a.pos, orients[i], h))
        else:
            new_agents_list.append(a)

    shared_reward = config.delivery_reward * deliveries_now
    next_state = GameState(
        tick=state.tick + 1,
        agents=tuple(new_agents_list),
        pots=pots,
        counters=counters,
        deliveries=state.deliveries + deliveries_now,
        score=state.score + shared_reward,
    )
    return StepOutcome(next_state, float(shared_reward), shaped, events)


def observation_length(num_agents: int) -> int:
    return 25 + 6 * (num_agents - 1)


def _nearest(cells, pos):
    """Nearest cell by Manhattan distance, ties broken by smallest (y, x)."""
    px, py = pos
    best = None
    best_key = None
    for x, y in cells:
        key = (abs(x - px) + abs(y - py), y, x)
        if best_key is None or key < best_key:
            best_key = key
            best = (x, y)
    return best


def featurize(
    state: GameState,
    seat: int,
    layout: Layout,
    config: EngineConfig = DEFAULT_CONFIG,
) -> np.ndarray:
    """Egocentric feature vector of length ``25 + 6*(N-1)``.

    Blocks, in order: held one-hot (4); orientation one-hot (4); scaled
    (dx, dy) offsets to the nearest onion dispenser, dish dispenser,
    serving station, idle pot and ready pot (10); presence bit per offset
    target (5, offsets are zero when absent); per other seat, ascending
    and skipping self, scaled offset plus held one-hot (6 each); nearest
    pot fill fraction and remaining cook fraction (2).  Offsets are
    divided by (width-1) / (height-1) and clipped to [-1, 1].
    """
    n = len(state.agents)
    if not 0 <= seat < n:
        raise SeatOutOfRange(f"seat {seat} out of range for {n} agents")

    me = state.agents[seat]
    px, py = me.pos
    xscale = 1.0 / max(1, layout.width - 1)
    yscale = 1.0 / max(1, layout.height - 1)

    def offset(cell):
        dx = (cell[0] - px) * xscale
        dy = (cell[1] - py) * yscale
        return (min(1.0, max(-1.0, dx)), min(1.0, max(-1.0, dy)))

    idle_pots = [c for c, p in state.pots.items() if p.phase == PotPhase.IDLE]
    ready_pots = [c for c, p in state.pots.items() if p.phase == PotPhase.READY]
    targets = [
        _nearest(layout.onion_dispenser_cells, me.pos),
        _nearest(layout.dish_dispenser_cells, me.pos),
        _nearest(layout.serving_cells, me.pos),
        _nearest(idle_pots, me.pos),
        _nearest(ready_pots, me.pos),
    ]

    out = np.zeros(observation_length(n), dtype=np.float64)
    out[me.held] = 1.0
    out[4 + me.orientation] = 1.0
    for k, cell in enumerate(targets):
        if cell is not None:
            dx, dy = offset(cell)
            out[8 + 2 * k] = dx
            out[9 + 2 * k] = dy
            out[18 + k] = 1.0
    base = 23
    for j in range(n):
        if j == seat:
            continue
        other = state.agents[j]
        dx, dy = offset(other.pos)
        out[base] = dx
        out[base + 1] = dy
        out[base + 2 + other.held] = 1.0
        base += 6
    pot_cell = _nearest(layout.pot_cells, me.pos)
    pot = state.pots[pot_cell]
    out[base] = pot.onions / POT_CAPACITY
    out[base + 1] = pot.ticks_remaining / config.cook_time
    return out

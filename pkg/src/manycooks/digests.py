"""Canonical state serialization and 64-bit FNV-1a digests.

Digests pin down exact engine behavior across runs, processes and
implementations; replay files and parity checks both rely on them.
"""

from __future__ import annotations

from .engine import GameState

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK = 0xFFFFFFFFFFFFFFFF

_HELD_CODES = "-ODS"  # Nothing, Onion, Dish, Soup
_PHASE_CODES = "ICR"  # Idle, Cooking, Ready
_ORIENT_CODES = "NSEW"


def fnv1a_64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h = ((h ^ b) * FNV_PRIME) & _MASK
    return h


def canonical_state(state: GameState) -> str:
    """Deterministic text form of a state; equal states serialize equally.

    Pots and counters are listed sorted by cell so dict history cannot
    leak into the digest.
    """
    agents = "|".join(
        f"{a.pos[0]},{a.pos[1]},{_ORIENT_CODES[a.orientation]},{_HELD_CODES[a.held]}"
        for a in state.agents
    )
    pots = "|".join(
        f"{x},{y}:{p.onions},{_PHASE_CODES[p.phase]},{p.ticks_remaining}"
        for (x, y), p in sorted(state.pots.items())
    )
    counters = "|".join(
        f"{x},{y}:{_HELD_CODES[obj]}"
        for (x, y), obj in sorted(state.counters.items())
    )
    return (
        f"t={state.tick};a={agents};p={pots};c={counters};"
        f"d={state.deliveries};s={state.score}"
    )


def state_digest(state: GameState) -> str:
    """64-bit FNV-1a over the canonical serialization, as 16 hex digits."""
    return f"{fnv1a_64(canonical_state(state).encode('utf-8')):016x}"

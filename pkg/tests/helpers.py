"""Shared test utilities: random layout generation and independent oracles.

Oracles here work on raw layout text or plain dict state, deliberately
avoiding the package's own grid helpers so they stay independent of the
code paths they check.
"""

from __future__ import annotations

import numpy as np

from manycooks.layout import Layout, LayoutError, parse_layout

STATION_CHARS = "PODS"


def random_layout_text(rng: np.random.Generator) -> str:
    """One candidate layout text; may violate some rule (callers retry)."""
    w = int(rng.integers(5, 10))
    h = int(rng.integers(5, 10))
    grid = [[" "] * w for _ in range(h)]
    for x in range(w):
        grid[0][x] = "X"
        grid[h - 1][x] = "X"
    for y in range(h):
        grid[y][0] = "X"
        grid[y][w - 1] = "X"
    for _ in range(int(rng.integers(0, (w * h) // 5))):
        x = int(rng.integers(1, w - 1))
        y = int(rng.integers(1, h - 1))
        grid[y][x] = "X"

    cells = [(x, y) for y in range(h) for x in range(w)]
    order = rng.permutation(len(cells))
    stations = list(STATION_CHARS) + [
        STATION_CHARS[int(rng.integers(4))] for _ in range(int(rng.integers(0, 3)))
    ]
    placed = 0
    for k in order:
        if placed == len(stations):
            break
        x, y = cells[k]
        if grid[y][x] in STATION_CHARS:
            continue
        grid[y][x] = stations[placed]
        placed += 1

    floors = [(x, y) for y in range(1, h - 1) for x in range(1, w - 1) if grid[y][x] == " "]
    seats = int(rng.integers(2, 6))
    if len(floors) >= seats:
        chosen = rng.choice(len(floors), size=seats, replace=False)
        for i, k in enumerate(chosen):
            x, y = floors[int(k)]
            grid[y][x] = str(i + 1)
    return "\n".join("".join(row) for row in grid)


def random_layout(rng: np.random.Generator, max_tries: int = 200) -> Layout:
    """A valid random layout (regenerates until the parser accepts one)."""
    for _ in range(max_tries):
        text = random_layout_text(rng)
        try:
            return parse_layout(text, name="random")
        except LayoutError:
            continue
    raise AssertionError("could not generate a valid random layout")


# ---------------------------------------------------------------------------
# Independent flood-fill oracle over raw layout text.


def oracle_unreachable_stations(text: str) -> set[str]:
    """Station chars with no instance adjacent to a cell any seat reaches.

    Plain iterative flood fill on the text grid; shares no code with
    the package's reachability check.
    """
    rows = text.split("\n")
    floors = set()
    seeds = set()
    stations: dict[str, list[tuple[int, int]]] = {c: [] for c in STATION_CHARS}
    for y, row in enumerate(rows):
        for x, ch in enumerate(row):
            if ch == " " or ch.isdigit():
                floors.add((x, y))
            if ch.isdigit():
                seeds.add((x, y))
            if ch in stations:
                stations[ch].append((x, y))

    reached = set(seeds)
    frontier = set(seeds)
    while frontier:
        nxt = set()
        for x, y in frontier:
            for dx, dy in ((0, 1), (0, -1), (1, 0), (-1, 0)):
                cell = (x + dx, y + dy)
                if cell in floors and cell not in reached:
                    reached.add(cell)
                    nxt.add(cell)
        frontier = nxt

    bad = set()
    for ch, cells in stations.items():
        ok = False
        for x, y in cells:
            for dx, dy in ((0, 1), (0, -1), (1, 0), (-1, 0)):
                if (x + dx, y + dy) in reached:
                    ok = True
        if not ok:
            bad.add(ch)
    return bad


def oracle_flood_distances(
    text_rows: list[str], start: tuple[int, int], blocked: set[tuple[int, int]]
) -> dict[tuple[int, int], int]:
    """Plain BFS distances over walkable cells of a text grid."""
    walkable = set()
    for y, row in enumerate(text_rows):
        for x, ch in enumerate(row):
            if (ch == " " or ch.isdigit()) and (x, y) not in blocked:
                walkable.add((x, y))
    walkable.add(start)
    dist = {start: 0}
    frontier = [start]
    d = 0
    while frontier:
        d += 1
        nxt = []
        for x, y in frontier:
            for dx, dy in ((0, 1), (0, -1), (1, 0), (-1, 0)):
                cell = (x + dx, y + dy)
                if cell in walkable and cell not in dist:
                    dist[cell] = d
                    nxt.append(cell)
        frontier = nxt
    return dist

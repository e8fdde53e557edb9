"""ASCII kitchen layouts: parsing, validation, rendering, reachability.

A layout is a rectangular tile grid with a fully closed border plus one
start cell per agent seat.  Layouts are immutable after construction and
safe to share between threads; parsing is a pure function.

Grid coordinates are ``(x, y)`` with ``x`` the column and ``y`` the row,
row 0 at the top.  The grid list is row-major: ``grid[y * width + x]``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import IntEnum
from functools import cached_property
from pathlib import Path


class Tile(IntEnum):
    FLOOR = 0
    COUNTER = 1
    POT = 2
    ONION_DISPENSER = 3
    DISH_DISPENSER = 4
    SERVING_STATION = 5


#: Tile <-> layout-file character map.  Seat digits '1'..'9' mark Floor
#: cells that double as start positions (seat index = digit - 1).
TILE_CHARS = {
    Tile.FLOOR: " ",
    Tile.COUNTER: "X",
    Tile.POT: "P",
    Tile.ONION_DISPENSER: "O",
    Tile.DISH_DISPENSER: "D",
    Tile.SERVING_STATION: "S",
}
CHAR_TILES = {c: t for t, c in TILE_CHARS.items()}

STATION_TILES = (
    Tile.POT,
    Tile.ONION_DISPENSER,
    Tile.DISH_DISPENSER,
    Tile.SERVING_STATION,
)

LAYOUT_FILE_SUFFIX = ".layout"

# 4-neighborhood in (dx, dy); y grows downward.
NEIGHBOR_OFFSETS = ((0, -1), (0, 1), (1, 0), (-1, 0))


class LayoutError(ValueError):
    """Base class for all layout validation failures."""


class NotRectangular(LayoutError):
    pass


class UnknownChar(LayoutError):
    pass


class DuplicateSeatDigit(LayoutError):
    pass


class NonContiguousSeatDigits(LayoutError):
    pass


class TooFewSeats(LayoutError):
    pass


class MissingStation(LayoutError):
    pass


class OpenBorder(LayoutError):
    pass


@dataclass(frozen=True)
class StationUnreachable:
    """A station type with no instance adjacent to any seat-reachable Floor cell."""

    tile: Tile
    cells: tuple[tuple[int, int], ...]

    def __str__(self) -> str:
        label = {
            Tile.POT: "Pot",
            Tile.ONION_DISPENSER: "OnionDispenser",
            Tile.DISH_DISPENSER: "DishDispenser",
            Tile.SERVING_STATION: "ServingStation",
        }[self.tile]
        return f"{label}Unreachable{list(self.cells)}"


@dataclass(frozen=True)
class Layout:
    """Immutable kitchen map for ``num_agents`` seats.

    Invariants (enforced by :func:`parse_layout`): the grid is rectangular
    with a fully non-Floor border, start positions are distinct Floor
    cells (one per seat, seat order preserved), and at least one of each
    station type is present.
    """

    name: str
    width: int
    height: int
    grid: tuple[Tile, ...]
    start_positions: tuple[tuple[int, int], ...]
    num_agents: int

    def tile_at(self, x: int, y: int) -> Tile:
        return self.grid[y * self.width + x]

    def cells_of(self, tile: Tile) -> tuple[tuple[int, int], ...]:
        return tuple(
            (i % self.width, i // self.width)
            for i, t in enumerate(self.grid)
            if t == tile
        )

    # Derived caches; excluded from equality/repr by virtue of being
    # cached_property (stored on __dict__, not dataclass fields).
    @cached_property
    def passable(self) -> tuple[bool, ...]:
        return tuple(t == Tile.FLOOR for t in self.grid)

    @cached_property
    def pot_cells(self) -> tuple[tuple[int, int], ...]:
        return self.cells_of(Tile.POT)

    @cached_property
    def onion_dispenser_cells(self) -> tuple[tuple[int, int], ...]:
        return self.cells_of(Tile.ONION_DISPENSER)

    @cached_property
    def dish_dispenser_cells(self) -> tuple[tuple[int, int], ...]:
        return self.cells_of(Tile.DISH_DISPENSER)

    @cached_property
    def serving_cells(self) -> tuple[tuple[int, int], ...]:
        return self.cells_of(Tile.SERVING_STATION)

    def floor_neighbors(self, x: int, y: int) -> list[tuple[int, int]]:
        """Floor cells 4-adjacent to (x, y); border closure makes bounds checks unnecessary
        only for interior cells, so clamp explicitly."""
        out = []
        for dx, dy in NEIGHBOR_OFFSETS:
            nx, ny = x + dx, y + dy
            if 0 <= nx < self.width and 0 <= ny < self.height and self.passable[ny * self.width + nx]:
                out.append((nx, ny))
        return out


def parse_layout(text: str, name: str = "layout") -> Layout:
    """Parse layout text into a validated :class:`Layout`.

    Char map: ``X`` Counter, ``P`` Pot, ``O`` OnionDispenser, ``D``
    DishDispenser, ``S`` ServingStation, space Floor, ``1``..``9`` Floor
    cell starting seat (digit - 1).  The text carries no name, so one is
    supplied by the caller (file loaders use the file stem).

    Raises a :class:`LayoutError` subclass on any rule violation; never
    raises anything else for arbitrary input strings.
    """
    if text.endswith("\n"):
        text = text[:-1]
    rows = text.split("\n")
    height = len(rows)
    width = len(rows[0]) if rows else 0
    if width == 0 or height == 0:
        raise NotRectangular("layout grid is empty")
    for i, row in enumerate(rows):
        if len(row) != width:
            raise NotRectangular(f"row {i} has length {len(row)}, expected {width}")

    grid: list[Tile] = []
    seats: dict[int, tuple[int, int]] = {}
    for y, row in enumerate(rows):
        for x, ch in enumerate(row):
            if ch in CHAR_TILES:
                grid.append(CHAR_TILES[ch])
            elif "1" <= ch <= "9":
                seat = int(ch) - 1
                if seat in seats:
                    raise DuplicateSeatDigit(f"seat digit '{ch}' appears more than once")
                seats[seat] = (x, y)
                grid.append(Tile.FLOOR)
            else:
                raise UnknownChar(f"unknown layout char {ch!r} at ({x}, {y})")

    if seats:
        expected = set(range(max(seats) + 1))
        if set(seats) != expected:
            missing = sorted(expected - set(seats))
            raise NonContiguousSeatDigits(
                f"seat digits are not contiguous from '1'; missing {[m + 1 for m in missing]}"
            )
    if len(seats) < 2:
        raise TooFewSeats(f"need at least 2 seat digits, found {len(seats)}")

    for y in range(height):
        for x in (range(width) if y in (0, height - 1) else (0, width - 1)):
            if grid[y * width + x] == Tile.FLOOR:
                raise OpenBorder(f"border cell ({x}, {y}) is Floor")

    present = set(grid)
    for station in STATION_TILES:
        if station not in present:
            raise MissingStation(f"layout has no {station.name}")

    return Layout(
        name=name,
        width=width,
        height=height,
        grid=tuple(grid),
        start_positions=tuple(seats[i] for i in range(len(seats))),
        num_agents=len(seats),
    )


def render_layout(layout: Layout) -> str:
    """Render a layout back to its canonical text (no trailing newline).

    ``parse_layout(render_layout(L), name=L.name)`` equals ``L``
    field-for-field.
    """
    chars = [TILE_CHARS[t] for t in layout.grid]
    for seat, (x, y) in enumerate(layout.start_positions):
        chars[y * layout.width + x] = str(seat + 1)
    return "\n".join(
        "".join(chars[y * layout.width : (y + 1) * layout.width])
        for y in range(layout.height)
    )


def load_layout_file(path: str | Path) -> Layout:
    """Read a ``.layout`` file; the layout name is the file stem."""
    p = Path(path)
    return parse_layout(p.read_text(encoding="utf-8"), name=p.stem)


def builtin_layout_names() -> list[str]:
    folder = Path(__file__).parent / "layouts"
    return sorted(p.stem for p in folder.glob(f"*{LAYOUT_FILE_SUFFIX}"))


def builtin_layout(name: str) -> Layout:
    """One of the layouts shipped with the package, by file stem."""
    path = Path(__file__).parent / "layouts" / f"{name}{LAYOUT_FILE_SUFFIX}"
    if not path.exists():
        raise LayoutError(
            f"no builtin layout {name!r}; available: {', '.join(builtin_layout_names())}"
        )
    return load_layout_file(path)


def reachable_floor(layout: Layout, start: tuple[int, int]) -> set[tuple[int, int]]:
    """Floor cells reachable from ``start`` by 4-connected movement."""
    seen = {start}
    queue = deque([start])
    while queue:
        x, y = queue.popleft()
        for nxt in layout.floor_neighbors(x, y):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


def check_reachability(layout: Layout) -> list[StationUnreachable]:
    """Check every station type is adjacent to a Floor cell some seat can reach.

    Reachability by at least one seat suffices; layouts may deliberately
    partition roles between seats.  Findings are data, not failures:
    an empty list means all station types passed.
    """
    reachable: set[tuple[int, int]] = set()
    for start in layout.start_positions:
        reachable |= reachable_floor(layout, start)

    findings = []
    for station in STATION_TILES:
        cells = layout.cells_of(station)
        ok = any(
            any(n in reachable for n in layout.floor_neighbors(x, y))
            for x, y in cells
        )
        if not ok:
            findings.append(StationUnreachable(tile=station, cells=cells))
    return findings

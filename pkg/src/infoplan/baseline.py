"""Latency baseline: split the grid into budget-sized blocks and sweep them in turn.

Each block is covered by a serpentine (boustrophedon) sweep with depot legs
at both ends. Flights cycle through the blocks in row-major order, so every
area is revisited once per cycle regardless of how informative it is.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import NoFeasiblePath
from .graph import MonitorGraph, Path, budget_limit, make_path

__all__ = [
    "PartitionSchedule",
    "serpentine",
    "block_tiling",
    "partition_budget",
    "build_partitions",
    "next_flight",
    "visit_counts",
]


def _grid_shape(g: MonitorGraph) -> tuple:
    if g.grid_shape is None:
        raise ValueError("the partition baseline needs a grid graph")
    return g.grid_shape


def block_tiling(shape: tuple, block: tuple) -> list:
    """Row-major ``(r0, c0, h, w)`` rectangles covering ``shape`` with ``block``-sized tiles.

    Tiles in the last block row or column are clipped to the grid.
    """
    rows, cols = shape
    h, w = block
    return [(r, c, min(h, rows - r), min(w, cols - c))
            for r in range(0, rows, h) for c in range(0, cols, w)]


def serpentine(g: MonitorGraph, rect: tuple) -> Path:
    """Cheapest boustrophedon sweep of a rectangle of cells, with depot legs.

    All four starting corners and both sweep directions are tried; ties go
    to the lexicographically smallest vertex sequence.
    """
    rows, cols = _grid_shape(g)
    r0, c0, h, w = rect
    if h < 1 or w < 1 or r0 + h > rows or c0 + w > cols:
        raise ValueError(f"rectangle {rect} does not fit a {rows}x{cols} grid")
    best = None
    for by_rows in (True, False):
        for flip_outer in (False, True):
            for flip_inner in (False, True):
                outer = range(h) if by_rows else range(w)
                inner = range(w) if by_rows else range(h)
                outer = list(reversed(outer)) if flip_outer else list(outer)
                inner = list(reversed(inner)) if flip_inner else list(inner)
                cells = []
                for k, a in enumerate(outer):
                    for b in (inner if k % 2 == 0 else inner[::-1]):
                        r, c = (a, b) if by_rows else (b, a)
                        cells.append(1 + (r0 + r) * cols + (c0 + c))
                p = make_path((0, *cells, g.end), g)
                if best is None or (p.cost, p.seq) < (best.cost, best.seq):
                    best = p
    return best


def partition_budget(g: MonitorGraph, block: tuple) -> float:
    """Smallest budget under which every tile of ``block`` can be swept."""
    return max(serpentine(g, rect).cost for rect in block_tiling(_grid_shape(g), block))


@dataclass
class PartitionSchedule:
    """Blocks, their sweeps and the index of the block flown next.

    Attributes
    ----------
    partitions : tuple of tuple of int
        0-based area indices per block, disjoint and covering every area.
    paths : tuple of Path
        Serpentine sweep per block.
    block : tuple
        Nominal ``(height, width)`` of the tiles.
    cycle_index : int
    """

    partitions: tuple
    paths: tuple
    block: tuple
    cycle_index: int = 0
    _count: int = field(default=0, repr=False)

    @property
    def period(self) -> int:
        return len(self.partitions)


def build_partitions(g: MonitorGraph, budget: float) -> PartitionSchedule:
    """Tile the grid into the fewest equal blocks whose sweeps fit ``budget``.

    Among tilings with the fewest blocks, exact tilings win, then blocks with
    aspect ratio at most 2, then the squarest block.

    Raises
    ------
    NoFeasiblePath
        When not even a single cell can be flown within the budget.
    """
    rows, cols = _grid_shape(g)
    limit = budget_limit(budget)
    best_key, best = None, None
    for h in range(1, rows + 1):
        for w in range(1, cols + 1):
            tiles = block_tiling((rows, cols), (h, w))
            paths = [serpentine(g, rect) for rect in tiles]
            if any(p.cost > limit for p in paths):
                continue
            aspect = max(h, w) / min(h, w)
            exact = rows % h == 0 and cols % w == 0
            key = (len(tiles), not exact, aspect > 2, aspect, -h * w, h)
            if best_key is None or key < best_key:
                best_key, best = key, ((h, w), paths)
    if best is None:
        raise NoFeasiblePath(f"no single area fits the budget {budget:g} s")
    block, paths = best
    parts = tuple(p.areas for p in paths)
    return PartitionSchedule(parts, tuple(paths), block)


def next_flight(sched: PartitionSchedule) -> Path:
    """Sweep of the current block; advances the cycle."""
    path = sched.paths[sched.cycle_index]
    sched.cycle_index = (sched.cycle_index + 1) % sched.period
    sched._count += 1
    return path


def visit_counts(sched: PartitionSchedule, N: int) -> np.ndarray:
    """Visits per area over the flights issued so far."""
    counts = np.zeros(N, dtype=int)
    full, rest = divmod(sched._count, sched.period)
    for k, part in enumerate(sched.partitions):
        counts[list(part)] += full + (1 if k < rest else 0)
    return counts

"""Exact integer geometry of the infinite triangular grid.

Points use axial coordinates over the basis (E, NE).  The Euclidean
embedding is only needed for nearest-node snapping and the numeric width
sampler; everything else stays in integers.
"""

from __future__ import annotations

import math
from enum import IntEnum
from typing import Iterable, NamedTuple

SQRT3_2 = math.sqrt(3.0) / 2.0


class GridPoint(NamedTuple):
    """A node of the triangular grid in axial coordinates."""

    x: int
    """Coordinate along the E unit vector."""
    y: int
    """Coordinate along the NE unit vector."""

    def __add__(self, other):  # type: ignore[override]
        return GridPoint(self.x + other[0], self.y + other[1])

    def __sub__(self, other):
        return GridPoint(self.x - other[0], self.y - other[1])

    def __neg__(self):
        return GridPoint(-self.x, -self.y)

    def __mul__(self, k):  # type: ignore[override]
        return GridPoint(self.x * k, self.y * k)

    __rmul__ = __mul__

    def embed(self) -> tuple[float, float]:
        return embed(self)


ORIGIN = GridPoint(0, 0)


class Direction(IntEnum):
    E = 0
    NE = 1
    NW = 2
    W = 3
    SW = 4
    SE = 5

    @property
    def vec(self) -> GridPoint:
        return UNIT[self]

    @property
    def axis(self) -> "Axis":
        return Axis(self % 3)

    def opposite(self) -> "Direction":
        return Direction((self + 3) % 6)

    def ccw(self, r: int = 1) -> "Direction":
        return Direction((self + r) % 6)

    def cw(self, r: int = 1) -> "Direction":
        return Direction((self - r) % 6)


class Axis(IntEnum):
    X = 0
    Y = 1
    Z = 2

    @property
    def forward(self) -> Direction:
        """The direction among E, NE, NW lying on this axis."""
        return Direction(int(self))


UNIT = {
    Direction.E: GridPoint(1, 0),
    Direction.NE: GridPoint(0, 1),
    Direction.NW: GridPoint(-1, 1),
    Direction.W: GridPoint(-1, 0),
    Direction.SW: GridPoint(0, -1),
    Direction.SE: GridPoint(1, -1),
}

DIRECTIONS = tuple(Direction)
_VEC_TO_DIR = {v: d for d, v in UNIT.items()}


def direction_of(v) -> Direction | None:
    """The direction whose unit vector is ``v``, or None."""
    return _VEC_TO_DIR.get((v[0], v[1]))


def rotate60(p, r: int = 1) -> GridPoint:
    x, y = p[0], p[1]
    for _ in range(r % 6):
        x, y = -y, x + y
    return GridPoint(x, y)


def grid_distance(p, q) -> int:
    dx = q[0] - p[0]
    dy = q[1] - p[1]
    if (dx >= 0) == (dy >= 0):
        return abs(dx) + abs(dy)
    return max(abs(dx), abs(dy))


def embed(p) -> tuple[float, float]:
    return (p[0] + p[1] / 2.0, p[1] * SQRT3_2)


def unembed(t) -> tuple[float, float]:
    """Real axial coordinates of a point of the plane."""
    y = t[1] / SQRT3_2
    return (t[0] - y / 2.0, y)


def nearest_grid_points(t, tol: float = 1e-9) -> set[GridPoint]:
    ax, ay = unembed(t)
    bx, by = math.floor(ax), math.floor(ay)
    best = math.inf
    found: list[tuple[float, GridPoint]] = []
    for x in range(bx - 1, bx + 3):
        for y in range(by - 1, by + 3):
            ex, ey = embed((x, y))
            dist = math.hypot(ex - t[0], ey - t[1])
            found.append((dist, GridPoint(x, y)))
            best = min(best, dist)
    return {p for dist, p in found if dist <= best + tol}


def step_directions(v) -> tuple[tuple[Direction, int], ...]:
    """Decompose ``v`` into at most two adjacent unit directions.

    Returns ``((d, a), (cw(d), b))`` with ``a >= 1`` and ``b >= 0`` so that
    ``v = a*u_d + b*u_cw(d)``; the zero vector gives an empty tuple.  All
    shortest grid paths to ``v`` use exactly these two directions.
    """
    if v[0] == 0 and v[1] == 0:
        return ()
    for d in DIRECTIONS:
        u1 = UNIT[d]
        u2 = UNIT[d.cw()]
        det = u1[0] * u2[1] - u1[1] * u2[0]
        a = (v[0] * u2[1] - v[1] * u2[0]) // det
        b = (u1[0] * v[1] - u1[1] * v[0]) // det
        if a >= 1 and b >= 0 and a * u1[0] + b * u2[0] == v[0] and a * u1[1] + b * u2[1] == v[1]:
            return ((d, a), (d.cw(), b))
    raise AssertionError("unreachable: every nonzero vector lies in a sector")


def bounding_box(points: Iterable) -> tuple[int, int, int, int]:
    xs, ys = [], []
    for p in points:
        xs.append(p[0])
        ys.append(p[1])
    return min(xs), min(ys), max(xs), max(ys)

"""Shapes as finite sets of grid nodes, edges and faces."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from ..trigrid import (
    ORIGIN,
    UNIT,
    Axis,
    Direction,
    GridPoint,
    direction_of,
    rotate60,
)

UP = 0
DOWN = 1

Edge = tuple[GridPoint, Direction]
Face = tuple[GridPoint, int]

_FORWARD = (Direction.E, Direction.NE, Direction.NW)


def canon_edge(a, b) -> Edge:
    """Canonical form of the unit edge between ``a`` and ``b``."""
    a = GridPoint(a[0], a[1])
    b = GridPoint(b[0], b[1])
    d = direction_of(b - a)
    if d is None:
        raise ValueError(f"{a} and {b} are not adjacent")
    if d in _FORWARD:
        return (a, d)
    return (b, d.opposite())


def edge_endpoints(e: Edge) -> tuple[GridPoint, GridPoint]:
    p, d = e
    return p, p + UNIT[d]


def face_corners(f: Face) -> tuple[GridPoint, GridPoint, GridPoint]:
    p, o = f
    if o == UP:
        return p, GridPoint(p.x + 1, p.y), GridPoint(p.x, p.y + 1)
    return p, GridPoint(p.x + 1, p.y), GridPoint(p.x + 1, p.y - 1)


def face_edges(f: Face) -> tuple[Edge, Edge, Edge]:
    a, b, c = face_corners(f)
    return canon_edge(a, b), canon_edge(a, c), canon_edge(b, c)


def face_from_corners(corners: Iterable) -> Face:
    cs = sorted((GridPoint(c[0], c[1]) for c in corners), key=lambda c: (c.y, c.x))
    if len(cs) != 3:
        raise ValueError("a face has three corners")
    if cs[0].y == cs[1].y:
        face = (cs[0], UP)
    else:
        face = (cs[1], DOWN)
    if set(face_corners(face)) != set(cs):
        raise ValueError(f"{cs} do not span a unit face")
    return face


@dataclass(frozen=True)
class Shape:
    nodes: frozenset
    edges: frozenset
    faces: frozenset

    @staticmethod
    def closed(nodes: Iterable = (), edges: Iterable = (), faces: Iterable = ()) -> "Shape":
        """Build a shape from elements, adding the edges of faces and the endpoints of edges."""
        fs = frozenset((GridPoint(p[0], p[1]), int(o)) for p, o in faces)
        es = {(GridPoint(p[0], p[1]), Direction(d)) for p, d in edges}
        for f in fs:
            es.update(face_edges(f))
        ns = {GridPoint(p[0], p[1]) for p in nodes}
        for e in es:
            ns.update(edge_endpoints(e))
        return Shape(frozenset(ns), frozenset(es), fs)

    def __contains__(self, p) -> bool:
        return p in self.nodes

    def is_empty(self) -> bool:
        return not self.nodes

    def is_connected(self) -> bool:
        if not self.nodes:
            return True
        adj: dict[GridPoint, list[GridPoint]] = {p: [] for p in self.nodes}
        for e in self.edges:
            a, b = edge_endpoints(e)
            adj[a].append(b)
            adj[b].append(a)
        start = next(iter(self.nodes))
        seen = {start}
        stack = [start]
        while stack:
            for q in adj[stack.pop()]:
                if q not in seen:
                    seen.add(q)
                    stack.append(q)
        return len(seen) == len(self.nodes)

    def check(self, require_origin: bool = True) -> None:
        """Raise ValueError unless closure, connectivity and the origin rule hold."""
        for e in self.edges:
            a, b = edge_endpoints(e)
            if a not in self.nodes or b not in self.nodes:
                raise ValueError(f"edge {e} has an endpoint outside the node set")
            if e[1] not in _FORWARD:
                raise ValueError(f"edge {e} is not canonical")
        for f in self.faces:
            for e in face_edges(f):
                if e not in self.edges:
                    raise ValueError(f"face {f} is missing edge {e}")
        if not self.is_connected():
            raise ValueError("shape is not connected")
        if require_origin and ORIGIN not in self.nodes:
            raise ValueError("shape does not contain the origin")

    def is_trivial(self) -> bool:
        """Empty or a single node."""
        return len(self.nodes) <= 1

    def diameter(self) -> int:
        from ..trigrid import grid_distance

        pts = list(self.nodes)
        return max((grid_distance(a, b) for a in pts for b in pts), default=0)

    def __repr__(self) -> str:
        return f"Shape(|V|={len(self.nodes)}, |E|={len(self.edges)}, |F|={len(self.faces)})"


POINT = Shape(frozenset({ORIGIN}), frozenset(), frozenset())


def make_line(d: Direction, length: int) -> Shape:
    if length < 0:
        raise ValueError("line length must be non-negative")
    u = UNIT[Direction(d)]
    pts = [u * i for i in range(length + 1)]
    return Shape.closed(pts, (canon_edge(pts[i], pts[i + 1]) for i in range(length)))


def make_triangle(d: Direction, length: int) -> Shape:
    if length < 1:
        raise ValueError("triangle side length must be at least 1")
    d = Direction(d)
    unit = Shape.closed(faces=[face_from_corners((ORIGIN, UNIT[d], UNIT[d.ccw()]))])
    return scale(unit, length)


def _scaled_face(f: Face, k: int) -> list[Face]:
    p, o = f
    q = p * k
    out: list[Face] = []
    if o == UP:
        for i in range(k):
            for j in range(k - i):
                out.append((GridPoint(q.x + i, q.y + j), UP))
                if j >= 1:
                    out.append((GridPoint(q.x + i, q.y + j), DOWN))
    else:
        for a in range(k):
            for b in range(k - a):
                node = GridPoint(q.x + a + b, q.y - b)
                out.append((node, DOWN))
                if b >= 1:
                    out.append((node, UP))
    return out


def scale(s: Shape, k: int) -> Shape:
    if k < 0:
        raise ValueError("scale must be non-negative")
    if k == 0:
        return POINT if s.nodes else s
    if k == 1:
        return s
    nodes = [p * k for p in s.nodes]
    edges: list[Edge] = []
    for p, d in s.edges:
        base = p * k
        u = UNIT[d]
        for i in range(k):
            edges.append((base + u * i, d))
    faces: list[Face] = []
    for f in s.faces:
        faces.extend(_scaled_face(f, k))
    return Shape.closed(nodes, edges, faces)


def rotate_shape(s: Shape, r: int) -> Shape:
    r %= 6
    if r == 0:
        return s
    nodes = frozenset(rotate60(p, r) for p in s.nodes)
    edges = frozenset(canon_edge(*(rotate60(q, r) for q in edge_endpoints(e))) for e in s.edges)
    faces = frozenset(face_from_corners(rotate60(c, r) for c in face_corners(f)) for f in s.faces)
    return Shape(nodes, edges, faces)


def translate_shape(s: Shape, t) -> Shape:
    tx, ty = t[0], t[1]
    if tx == 0 and ty == 0:
        return s
    return Shape(
        frozenset(GridPoint(p.x + tx, p.y + ty) for p in s.nodes),
        frozenset((GridPoint(p.x + tx, p.y + ty), d) for p, d in s.edges),
        frozenset((GridPoint(p.x + tx, p.y + ty), o) for p, o in s.faces),
    )


def union_shapes(*shapes: Shape) -> Shape:
    return Shape(
        frozenset().union(*(s.nodes for s in shapes)),
        frozenset().union(*(s.edges for s in shapes)),
        frozenset().union(*(s.faces for s in shapes)),
    )


def _unit_parallelogram(a: GridPoint, u: GridPoint, v: GridPoint) -> list[Face]:
    """The two faces of the rhombus spanned by unit vectors u and v at a."""
    s = a + u + v
    if direction_of(u - v) is not None:
        return [face_from_corners((a, a + u, a + v)), face_from_corners((a + u, a + v, s))]
    return [face_from_corners((a, a + u, s)), face_from_corners((a, a + v, s))]


def minkowski_with_line(s: Shape, d: Direction, length: int) -> Shape:
    """Sweep ``s`` along ``length`` unit steps in direction ``d``."""
    if length < 1:
        raise ValueError("line length must be at least 1")
    d = Direction(d)
    u = UNIT[d]
    nodes: set = set()
    edges: set = set()
    faces: set = set()
    for i in range(length + 1):
        t = u * i
        nodes.update(p + t for p in s.nodes)
        edges.update((p + t, e) for p, e in s.edges)
        faces.update((p + t, o) for p, o in s.faces)
    for p in s.nodes:
        for i in range(length):
            edges.add(canon_edge(p + u * i, p + u * (i + 1)))
    for e in s.edges:
        if e[1].axis == d.axis:
            continue
        a, b = edge_endpoints(e)
        ev = b - a
        for i in range(length):
            faces.update(_unit_parallelogram(a + u * i, ev, u))
    return Shape.closed(nodes, edges, faces)


def axis_width(s: Shape, axis: Axis) -> int:
    """Minimal axis width of ``s`` on ``axis``.

    Components on grid lines are maximal runs of collinear edges.  Inside the
    open band between two neighbouring lines, a run of ``m`` side-adjacent
    faces has chord infimum ``m // 2``, and a crossing edge without an
    adjacent face is a component of length 0.  The result is always an
    integer.
    """
    if not s.nodes:
        raise ValueError("axis width of an empty shape")
    r = (-int(axis)) % 6
    t = rotate_shape(s, r)
    best = None

    def consider(w: int) -> None:
        nonlocal best
        if best is None or w < best:
            best = w

    rows: dict[int, list[int]] = {}
    for p in t.nodes:
        rows.setdefault(p.y, []).append(p.x)
    for y, xs in rows.items():
        xs.sort()
        run = 0
        for i, x in enumerate(xs):
            if i > 0 and xs[i - 1] == x - 1 and (GridPoint(x - 1, y), Direction.E) in t.edges:
                run += 1
            else:
                if i > 0:
                    consider(run)
                run = 0
        consider(run)

    bands: dict[int, set[int]] = {}
    for p, o in t.faces:
        if o == UP:
            bands.setdefault(p.y, set()).add(2 * p.x)
        else:
            bands.setdefault(p.y - 1, set()).add(2 * p.x + 1)
    for y, idx in bands.items():
        for i in idx:
            if i - 1 in idx:
                continue
            m = 1
            while i + m in idx:
                m += 1
            consider(m // 2)
    for p, d in t.edges:
        if d == Direction.E:
            continue
        band = bands.get(p.y, ())
        if d == Direction.NE:
            adjacent = (2 * p.x, 2 * p.x - 1)
        else:
            adjacent = (2 * p.x - 2, 2 * p.x - 1)
        if not any(i in band for i in adjacent):
            consider(0)
    assert best is not None
    return best

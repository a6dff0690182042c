"""Decision procedures on shapes: holes, star convexity, convexity, symmetry."""

from __future__ import annotations

from typing import NamedTuple

from ..trigrid import (
    ORIGIN,
    UNIT,
    Direction,
    GridPoint,
    bounding_box,
    grid_distance,
    step_directions,
)
from .core import (
    DOWN,
    POINT,
    UP,
    Shape,
    canon_edge,
    edge_endpoints,
    face_corners,
    face_edges,
    face_from_corners,
    make_line,
    make_triangle,
    minkowski_with_line,
    rotate_shape,
    translate_shape,
)
from .tree import SnowflakeTree, line, ssum, tri, union


class NotStarConvex(ValueError):
    pass


class NotConvex(ValueError):
    pass


def is_hole_free(s: Shape) -> bool:
    """True iff the complement of the embedded region is connected.

    Floods the complement cell complex (missing faces, edges and nodes)
    inside a padded bounding box, starting from the box border.
    """
    if not s.nodes:
        return True
    x0, y0, x1, y1 = bounding_box(s.nodes)
    x0, y0, x1, y1 = x0 - 2, y0 - 2, x1 + 2, y1 + 2

    def inside(p) -> bool:
        return x0 <= p[0] <= x1 and y0 <= p[1] <= y1

    def border(p) -> bool:
        return p[0] in (x0, x1) or p[1] in (y0, y1)

    adj: dict[tuple, list[tuple]] = {}

    def link(a: tuple, b: tuple) -> None:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)

    for x in range(x0, x1 + 1):
        for y in range(y0, y1 + 1):
            p = GridPoint(x, y)
            if p not in s.nodes:
                adj.setdefault(("n", p), [])
            for d in (Direction.E, Direction.NE, Direction.NW):
                e = (p, d)
                q = p + UNIT[d]
                if not inside(q) or e in s.edges:
                    continue
                for end in (p, q):
                    if end not in s.nodes:
                        link(("e", e), ("n", end))
                adj.setdefault(("e", e), [])
            for o in (UP, DOWN):
                f = (p, o)
                if not all(inside(c) for c in face_corners(f)) or f in s.faces:
                    continue
                adj.setdefault(("f", f), [])
                for e in face_edges(f):
                    if e not in s.edges:
                        link(("f", f), ("e", e))
    start = [c for c in adj if c[0] == "n" and border(c[1])]
    seen = set(start)
    stack = list(start)
    while stack:
        for nxt in adj[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return len(seen) == len(adj)


def _paths_contained(s: Shape, c: GridPoint) -> bool:
    """Every shortest grid path from ``c`` to every node of ``s`` lies in ``s``."""
    order = sorted(s.nodes, key=lambda v: grid_distance(c, v))
    ok: set[GridPoint] = set()
    for v in order:
        if v == c:
            ok.add(v)
            continue
        for d, count in step_directions(v - c):
            if count == 0:
                continue
            w = v - UNIT[d]
            if w not in ok or canon_edge(w, v) not in s.edges:
                return False
        ok.add(v)
    return True


def star_centers(s: Shape) -> set[GridPoint]:
    if not s.nodes or not is_hole_free(s):
        return set()
    return {c for c in s.nodes if _paths_contained(s, c)}


def is_star_convex(s: Shape) -> tuple[bool, set[GridPoint]]:
    centers = star_centers(s)
    return bool(centers), centers


def parallelogram(v, center=ORIGIN) -> tuple[Shape, SnowflakeTree]:
    """The union of all shortest paths from ``center`` to ``v`` with enclosed faces."""
    parts = step_directions(GridPoint(v[0] - center[0], v[1] - center[1]))
    if not parts:
        return translate_shape(POINT, center), line(Direction.E, 0)
    (d, a), (d2, b) = parts
    shape = make_line(d, a)
    tree = line(d, a)
    if b:
        shape = minkowski_with_line(shape, d2, b)
        tree = ssum(d2, b, tree)
    return translate_shape(shape, center), tree


def _triangle_piece(p: GridPoint, d1: Direction, d2: Direction, center) -> tuple[Shape, SnowflakeTree]:
    """The face at ``p`` spanned by d1 and d2 = cw(d1), swept back to ``center``."""
    rel = p - center
    a = b = None
    for i in range(abs(rel.x) + abs(rel.y) + 1):
        rest = rel - UNIT[d1] * i
        for j in range(abs(rel.x) + abs(rel.y) + 1):
            if rest == UNIT[d2] * j:
                a, b = i, j
                break
        if a is not None:
            break
    if a is None:
        raise NotStarConvex(f"face at {p} does not lie in the sector of its edge")
    shape = make_triangle(d2, 1)
    tree = tri(d2, 1)
    if a:
        shape = minkowski_with_line(shape, d1, a)
        tree = ssum(d1, a, tree)
    if b:
        shape = minkowski_with_line(shape, d2, b)
        tree = ssum(d2, b, tree)
    return translate_shape(shape, center), tree


def star_convex_decompose(s: Shape) -> tuple[list[Shape], SnowflakeTree]:
    """Cover a star convex shape centered at the origin by convex pieces.

    One parallelogram per node plus one swept triangle per edge that lies on
    no shortest path from the origin and has no node beyond it.  The pieces
    may overlap; their union is exactly ``s``.
    """
    ok, centers = is_star_convex(s)
    if not ok:
        raise NotStarConvex("shape is not star convex")
    if ORIGIN not in centers:
        raise NotStarConvex("the origin is not a center; translate the shape to a center first")
    pieces: dict[SnowflakeTree, Shape] = {}
    for v in sorted(s.nodes):
        shape, tree = parallelogram(v)
        pieces.setdefault(tree, shape)
    for e in sorted(s.edges):
        u, w = edge_endpoints(e)
        du, dw = grid_distance(ORIGIN, u), grid_distance(ORIGIN, w)
        if du != dw:
            continue
        thirds = []
        for f in _faces_of_edge(e):
            third = next(x for x in face_corners(f) if x != u and x != w)
            thirds.append(third)
        near = [t for t in thirds if grid_distance(ORIGIN, t) < du]
        far = [t for t in thirds if grid_distance(ORIGIN, t) > du]
        if far and far[0] in s.nodes:
            continue
        p = near[0]
        d1 = _dir(u - p)
        d2 = _dir(w - p)
        if d2 != d1.cw():
            d1, d2 = d2, d1
        shape, tree = _triangle_piece(p, d1, d2, ORIGIN)
        pieces.setdefault(tree, shape)
    trees = list(pieces)
    shapes = [pieces[t] for t in trees]
    root = trees[0] if len(trees) == 1 else union(*trees)
    return shapes, root


def _dir(v) -> Direction:
    from ..trigrid import direction_of

    d = direction_of(v)
    assert d is not None
    return d


def _faces_of_edge(e):
    a, b = edge_endpoints(e)
    out = []
    for d in Direction:
        c = a + UNIT[d]
        if c != b and _adjacent(c, b):
            out.append(face_from_corners((a, b, c)))
    return out


def _adjacent(p, q) -> bool:
    return grid_distance(p, q) == 1


class ConvexSides(NamedTuple):
    """Counter-clockwise side lengths; ``a`` is the bottom-left side on the Z axis."""

    a: int
    b: int
    c: int
    d: int
    e: int
    f: int

    def is_closed(self) -> bool:
        return (
            self.a + self.b == self.d + self.e
            and self.b + self.c == self.e + self.f
            and self.c + self.d == self.f + self.a
        )


def _extremes(nodes) -> tuple[int, int, int, int, int, int]:
    xs = [p[0] for p in nodes]
    ys = [p[1] for p in nodes]
    ss = [p[0] + p[1] for p in nodes]
    return min(xs), max(xs), min(ys), max(ys), min(ss), max(ss)


def hexagon_shape(xmin, xmax, ymin, ymax, smin, smax) -> Shape:
    """All grid elements inside the axis-aligned hexagon given by its six support lines."""
    nodes = {
        GridPoint(x, y)
        for x in range(xmin, xmax + 1)
        for y in range(ymin, ymax + 1)
        if smin <= x + y <= smax
    }
    edges = set()
    faces = set()
    for p in nodes:
        for d in (Direction.E, Direction.NE, Direction.NW):
            if p + UNIT[d] in nodes:
                edges.add((p, d))
        for o in (UP, DOWN):
            if all(c in nodes for c in face_corners((p, o))):
                faces.add((p, o))
    return Shape(frozenset(nodes), frozenset(edges), frozenset(faces))


def convex_hull_shape(s: Shape) -> Shape:
    return hexagon_shape(*_extremes(s.nodes))


def is_convex(s: Shape) -> bool:
    if not s.nodes:
        return False
    return convex_hull_shape(s) == s


def convex_sides(s: Shape) -> ConvexSides:
    if not is_convex(s):
        raise NotConvex("shape is not convex")
    xmin, xmax, ymin, ymax, smin, smax = _extremes(s.nodes)
    a = min(ymax, smin - xmin) - max(ymin, smin - xmax)
    b = min(xmax, smax - ymin) - max(xmin, smin - ymin)
    c = min(ymax, smax - xmax) - max(ymin, smin - xmax)
    d = min(ymax, smax - xmin) - max(ymin, smax - xmax)
    e = min(xmax, smax - ymax) - max(xmin, smin - ymax)
    f = min(ymax, smax - xmin) - max(ymin, smin - xmin)
    return ConvexSides(a, b, c, d, e, f)


def shape_from_sides(sides: ConvexSides) -> Shape:
    """The convex shape with the given side lengths, first vertex at the origin."""
    if not ConvexSides(*sides).is_closed():
        raise NotConvex(f"side lengths {tuple(sides)} do not close")
    walk = (Direction.SE, Direction.E, Direction.NE, Direction.NW, Direction.W, Direction.SW)
    p = ORIGIN
    pts = [p]
    for length, d in zip(sides, walk):
        p = p + UNIT[d] * length
        pts.append(p)
    assert p == ORIGIN
    return hexagon_shape(*_extremes(pts))


def convex_fits(s1: ConvexSides, s2: ConvexSides) -> bool:
    a1, b1, c1, d1, _, _ = s1
    a2, b2, c2, d2, _, _ = s2
    return (
        a1 + b1 <= a2 + b2
        and b1 + c1 <= b2 + c2
        and c1 + d1 <= c2 + d2
        and a1 + b1 + c1 <= a2 + b2 + c2
        and b1 + c1 + d1 <= b2 + c2 + d2
    )


def is_r_symmetric(s: Shape, r: int) -> tuple[bool, GridPoint | None]:
    if not s.nodes:
        return True, ORIGIN
    rot = rotate_shape(s, r)
    t = min(s.nodes) - min(rot.nodes)
    if translate_shape(rot, t) == s:
        return True, t
    return False, None

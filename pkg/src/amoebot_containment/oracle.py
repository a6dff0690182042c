"""Brute-force ground truth and instance generators.

Nothing here touches the runtime or the distributed primitives: answers come
straight from node, edge and face sets.
"""

from __future__ import annotations

import random

import numpy as np
from typing import Iterable

from .shapes import (
    Shape,
    axis_width,
    eval_tree,
    is_convex,
    line,
    rotate_shape,
    scale,
    shift,
    ssum,
    translate_shape,
    tri,
    union,
    validate_tree,
)
from .shapes.core import canon_edge, face_corners
from .shapes.tree import SnowflakeTree
from .trigrid import DIRECTIONS, UNIT, Axis, Direction, GridPoint, embed, nearest_grid_points


class PremiseViolated(ValueError):
    pass


def _points(A) -> frozenset:
    pts = getattr(A, "occupied", None)
    if pts is not None:
        return pts
    return frozenset(GridPoint(p[0], p[1]) for p in A)


def oracle_placements(A, S: Shape, k: int, r: int) -> set[GridPoint]:
    """Every amoebot ``p`` with all nodes of ``k*S`` rotated by ``r``, shifted by ``p``, in ``A``."""
    if k < 1:
        raise ValueError("scale must be at least 1")
    occ = _points(A)
    nodes = rotate_shape(scale(S, k), r).nodes
    cand = set(occ)
    for v in sorted(nodes, key=lambda q: -abs(q.x) - abs(q.y)):
        cand = {p for p in cand if GridPoint(p.x + v.x, p.y + v.y) in occ}
        if not cand:
            break
    return cand


def oracle_all_rotations(A, S: Shape, k: int) -> dict[int, set[GridPoint]]:
    return {r: oracle_placements(A, S, k, r) for r in range(6)}


def oracle_kmax(A, S: Shape) -> int:
    """Largest scale with a placement in some rotation; scales are tried until ``k*S`` outgrows ``A``."""
    if len(S.nodes) <= 1:
        raise ValueError("k_max is undefined for trivial shapes")
    occ = _points(A)
    best = 0
    k = 1
    while len(scale(S, k).nodes) <= len(occ):
        if any(oracle_placements(occ, S, k, r) for r in range(6)):
            best = k
        k += 1
    return best


def boundary_scan(A, d: Direction) -> dict[GridPoint, int]:
    """Distance from each node to the last occupied node in direction ``d``."""
    occ = _points(A)
    u = UNIT[Direction(d)]
    out = {}
    for p in occ:
        t = 0
        q = p
        while GridPoint(q.x + u.x, q.y + u.y) in occ:
            q = GridPoint(q.x + u.x, q.y + u.y)
            t += 1
        out[p] = t
    return out


def contains_shape(inner: Shape, outer: Shape) -> bool:
    return inner.nodes <= outer.nodes and inner.edges <= outer.edges and inner.faces <= outer.faces


def oracle_self_contained(S: Shape, k: int, k2: int) -> bool:
    """Some rotation and grid translation of ``k*S`` lies inside ``k2*S``."""
    if not k < k2:
        raise ValueError("need k < k2")
    big = scale(S, k2)
    for r in range(6):
        small = rotate_shape(scale(S, k), r)
        anchor = min(small.nodes)
        for m in big.nodes:
            t = GridPoint(m.x - anchor.x, m.y - anchor.y)
            if contains_shape(translate_shape(small, t), big):
                return True
    return False


def two_arm_shape() -> Shape:
    """A non-snowflake shape: one arm of length 2 to the east, one bent arm to the south-west."""
    o = GridPoint(0, 0)
    return Shape.closed(
        [o],
        [
            canon_edge(o, (1, 0)),
            canon_edge((1, 0), (2, 0)),
            canon_edge(o, (0, -1)),
            canon_edge((0, -1), (-1, -1)),
        ],
    )


def lower_bound_anchors(k: int) -> tuple[list[GridPoint], list[GridPoint]]:
    ps = [GridPoint(0, i) for i in range(k)]
    qs = [GridPoint(-k, -k + i) for i in range(k)]
    return ps, qs


def gen_lower_bound(k: int, occupied_q: Iterable[bool] | int | str) -> tuple[frozenset, set[GridPoint]]:
    """Two blocks joined by one edge plus the optional nodes ``q_i``.

    ``occupied_q`` is a sequence of k booleans, an int bitmask (bit i is
    ``q_i``) or a string of 0/1 characters with ``q_0`` first.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    if isinstance(occupied_q, int):
        mask = [bool((occupied_q >> i) & 1) for i in range(k)]
    elif isinstance(occupied_q, str):
        mask = [c == "1" for c in occupied_q]
    else:
        mask = [bool(b) for b in occupied_q]
    if len(mask) != k:
        raise ValueError(f"mask must have {k} entries")
    if not any(mask):
        raise ValueError("at least one q_i must be occupied")
    pts = {GridPoint(x, y) for x in range(0, 2 * k + 1) for y in range(0, k)}
    pts |= {GridPoint(x, y) for x in range(-(k - 1), 1) for y in range(-k, 0)}
    ps, qs = lower_bound_anchors(k)
    expected = set()
    for i in range(k):
        if mask[i]:
            pts.add(qs[i])
            expected.add(ps[i])
    return frozenset(pts), expected


def gen_random_structure(n: int, seed) -> frozenset:
    """Connected structure of exactly ``n`` nodes grown from the origin."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = random.Random(seed)
    occ = {GridPoint(0, 0)}
    frontier: list[GridPoint] = []
    in_frontier: set[GridPoint] = set()

    def push(p: GridPoint) -> None:
        for d in DIRECTIONS:
            q = p + UNIT[d]
            if q not in occ and q not in in_frontier:
                in_frontier.add(q)
                frontier.append(q)

    push(GridPoint(0, 0))
    while len(occ) < n:
        i = rng.randrange(len(frontier))
        frontier[i], frontier[-1] = frontier[-1], frontier[i]
        p = frontier.pop()
        in_frontier.discard(p)
        occ.add(p)
        push(p)
    return frozenset(occ)


def grow_structure(seed_points: Iterable, n: int, seed) -> frozenset:
    """Random growth starting from a connected node set until it has ``n`` nodes."""
    rng = random.Random(seed)
    occ = {GridPoint(p[0], p[1]) for p in seed_points}
    frontier = sorted({p + UNIT[d] for p in occ for d in DIRECTIONS} - occ)
    fset = set(frontier)
    while len(occ) < n and frontier:
        i = rng.randrange(len(frontier))
        frontier[i], frontier[-1] = frontier[-1], frontier[i]
        p = frontier.pop()
        fset.discard(p)
        occ.add(p)
        for d in DIRECTIONS:
            q = p + UNIT[d]
            if q not in occ and q not in fset:
                fset.add(q)
                frontier.append(q)
    return frozenset(occ)


def gen_random_snowflake(max_nodes: int, seed, max_length: int = 2) -> SnowflakeTree:
    """Random valid snowflake tree with at most ``max_nodes`` nodes."""
    if max_nodes < 1:
        raise ValueError("max_nodes must be positive")
    rng = random.Random(seed)

    def leaf() -> SnowflakeTree:
        d = rng.choice(DIRECTIONS)
        if rng.random() < 0.5:
            return line(d, rng.randint(1, max_length))
        return tri(d, rng.randint(1, max_length))

    def build(budget: int) -> SnowflakeTree:
        if budget <= 1 or rng.random() < 0.3:
            return leaf()
        kinds = ["sum", "shift"] + (["union"] if budget >= 3 else [])
        kind = rng.choice(kinds)
        d = rng.choice(DIRECTIONS)
        ell = rng.randint(1, max_length)
        if kind == "union":
            left = rng.randint(1, budget - 2)
            return union(build(left), build(budget - 1 - left))
        if kind == "sum":
            return ssum(d, ell, build(budget - 1))
        for _ in range(20):
            child = build(budget - 1)
            if axis_width(eval_tree(child), d.axis) > 0:
                return shift(d, ell, child)
        return ssum(d, ell, build(budget - 1))

    t = build(max_nodes)
    validate_tree(t)
    return t


# ---------------------------------------------------------------------------
# real-valued geometry


def _region(s: Shape):
    from shapely.geometry import LineString, Point, Polygon
    from shapely.ops import unary_union

    parts = [Polygon([embed(c) for c in face_corners(f)]) for f in s.faces]
    for p, d in s.edges:
        q = p + UNIT[d]
        parts.append(LineString([embed(p), embed(q)]))
    parts.extend(Point(embed(p)) for p in s.nodes)
    return unary_union(parts)


def region_contains(outer: Shape, inner: Shape, t=(0.0, 0.0), tol: float = 1e-9) -> bool:
    """Whether ``inner`` shifted by the real vector ``t`` lies in ``outer`` as regions."""
    from shapely.affinity import translate

    big = _region(outer).buffer(tol)
    small = translate(_region(inner), t[0], t[1])
    return big.covers(small)


def snap_translation(S: Shape, S2: Shape, t) -> GridPoint:
    """A nearest grid node ``t'`` to the real translation ``t`` with ``S + t'`` inside ``S2``."""
    if not region_contains(S2, S, t):
        raise PremiseViolated(f"{S!r} shifted by {tuple(t)} is not inside {S2!r}")
    for g in sorted(nearest_grid_points(t)):
        if contains_shape(translate_shape(S, g), S2):
            return g
    raise PremiseViolated("no nearest grid node keeps the shape inside")


def _row_chords(s: Shape, h: int) -> list[float]:
    """Component lengths of the grid line at row ``h`` through ``s``."""
    intervals = []
    for p in s.nodes:
        if p.y == h:
            x = embed(p)[0]
            intervals.append((x, x))
    for p, d in s.edges:
        if d == Direction.E and p.y == h:
            x = embed(p)[0]
            intervals.append((x, x + 1.0))
    intervals.sort()
    out = []
    lo, hi = intervals[0]
    for a, b in intervals[1:]:
        if a <= hi + 1e-12:
            hi = max(hi, b)
        else:
            out.append(hi - lo)
            lo, hi = a, b
    out.append(hi - lo)
    return out


def _band_elements(s: Shape, h: int) -> np.ndarray:
    """Rows ``(lo0, hi0, lo1, hi1)``: each element's interval at the bottom and top of band ``h``.

    Inside the open band every interval endpoint is affine in the height.
    """
    rows = []
    for p, d in s.edges:
        if d != Direction.E and p.y == h:
            x0 = embed(p)[0]
            x1 = embed(p + UNIT[d])[0]
            rows.append((x0, x0, x1, x1))
    for f in s.faces:
        cs = face_corners(f)
        if min(c.y for c in cs) != h:
            continue
        bottom = [embed(c)[0] for c in cs if c.y == h]
        top = [embed(c)[0] for c in cs if c.y == h + 1]
        rows.append((min(bottom), max(bottom), min(top), max(top)))
    return np.array(rows, dtype=float).reshape(-1, 4)


def _band_chords(el: np.ndarray, fr: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per sample height: number of components and the shortest component length."""
    lo = el[:, 0:1] + (el[:, 2:3] - el[:, 0:1]) * fr[None, :]
    hi = el[:, 1:2] + (el[:, 3:4] - el[:, 1:2]) * fr[None, :]
    order = np.argsort(lo, axis=0, kind="stable")
    lo = np.take_along_axis(lo, order, axis=0)
    hi = np.take_along_axis(hi, order, axis=0)
    reach = np.maximum.accumulate(hi, axis=0)
    starts = np.ones_like(lo, dtype=bool)
    starts[1:] = lo[1:] > reach[:-1] + 1e-12
    ends = np.ones_like(lo, dtype=bool)
    ends[:-1] = starts[1:]
    start_lo = np.maximum.accumulate(np.where(starts, lo, -np.inf), axis=0)
    lengths = np.where(ends, reach - start_lo, np.inf)
    return starts.sum(axis=0), lengths.min(axis=0)


def numeric_axis_width(s: Shape, axis: Axis, samples: int = 10_000) -> float:
    """Infimum chord length along lines parallel to ``axis``, by sampling line offsets.

    Offsets are spread evenly over the shape's extent.  Offsets on grid
    lines are measured exactly.  Within an open band between two grid lines
    each component's chord length is affine in the offset, so the shortest
    chord at the two outermost samples of a band is extrapolated to the band
    edges.
    """
    t = rotate_shape(s, (-int(axis)) % 6)
    rows = [p.y for p in t.nodes]
    y0, y1 = min(rows), max(rows)
    best = min(min(_row_chords(t, h)) for h in range(y0, y1 + 1))
    bands = y1 - y0
    if not bands:
        return best
    per = max(2, samples // bands)
    fr = np.arange(1, per + 1) / (per + 1)
    for h in range(y0, y1):
        el = _band_elements(t, h)
        if not len(el):
            continue
        count, shortest = _band_chords(el, fr)
        if count.min() != count.max():
            raise AssertionError("component structure changed inside an open band")
        best = min(best, float(shortest.min()))
        edge = _band_chords(el, fr[[0, 1, -2, -1]])[1]
        slope_lo = (edge[1] - edge[0]) / (fr[1] - fr[0])
        slope_hi = (edge[3] - edge[2]) / (fr[-1] - fr[-2])
        best = min(best, edge[0] - slope_lo * fr[0], edge[3] + slope_hi * (1.0 - fr[-1]))
    return max(0.0, float(best))


def convex_fit_bruteforce(s1: Shape, s2: Shape) -> bool:
    """Whether a grid translation puts convex ``s1`` inside convex ``s2``."""
    anchor = min(s1.nodes)
    for m in s2.nodes:
        t = GridPoint(m.x - anchor.x, m.y - anchor.y)
        if all(GridPoint(p.x + t.x, p.y + t.y) in s2.nodes for p in s1.nodes):
            return True
    return False


__all__ = [
    "PremiseViolated",
    "boundary_scan",
    "contains_shape",
    "convex_fit_bruteforce",
    "gen_lower_bound",
    "gen_random_snowflake",
    "gen_random_structure",
    "grow_structure",
    "is_convex",
    "lower_bound_anchors",
    "numeric_axis_width",
    "oracle_all_rotations",
    "oracle_kmax",
    "oracle_placements",
    "oracle_self_contained",
    "region_contains",
    "snap_translation",
    "two_arm_shape",
]

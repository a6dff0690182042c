"""End-to-end shape containment on a world.

The host loop only branches on global-circuit votes and on the program
constant (the tree).  Values reported in a ``SolveResult`` are read through
observer taps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chain_ops import (
    EQ,
    LT,
    Counters,
    Register,
    add,
    copy_register,
    double,
    halve,
    is_zero,
    load_const,
    mul_const,
    pasc_compare,
)
from .placement_prims import (
    PlacementSet,
    _chains_from_heads,
    line_placements,
    shifted_placements,
    stretched_placements,
    triangle_placements,
)
from .runtime import World, pin
from .shapes import (
    Kind,
    Shape,
    SnowflakeTree,
    canon_edge,
    edge_endpoints,
    eval_tree,
    face_corners,
    face_from_corners,
    is_star_convex,
    rotate_tree,
    tri,
)
from .trigrid import Direction, GridPoint, direction_of, embed, rotate60

ROTATIONS = range(6)


class TrivialShape(ValueError):
    """The target shape is empty or a single node."""


class InvalidPlacement(RuntimeError):
    """An edge walk of the placement ran off the structure."""


@dataclass
class SolveResult:
    k_max: int
    placements: dict[int, set[GridPoint]]
    rounds_used: int
    search_trace: list[tuple[int, bool]] = field(default_factory=list)
    strategy: str = ""

    @property
    def scale_is_zero(self) -> bool:
        return self.k_max == 0


def _flag_name(prefix: str, r: int) -> str:
    return f"{prefix}.r{r}"


def snowflake_placements(world: World, t: SnowflakeTree, k: Register) -> PlacementSet:
    """Placements of ``k*S`` for all six rotations, evaluating the tree from the leaves up."""
    out = {}
    for r in ROTATIONS:
        out[r] = _placements_one(world, rotate_tree(t, r), k)
    return PlacementSet(world, out)


def _placements_one(world: World, t: SnowflakeTree, k: Register) -> np.ndarray:
    vals: dict[int, np.ndarray] = {}
    for v in t.nodes_postorder():
        if v.kind is Kind.LINE:
            if v.length == 0:
                f = np.ones(world.n, dtype=bool)
            else:
                length = mul_const(world, k, v.length, Register(world, "node.len"))
                f = line_placements(world, v.direction, length)
                length.drop()
        elif v.kind is Kind.TRI:
            side = mul_const(world, k, v.length, Register(world, "node.len"))
            f = triangle_placements(world, v.direction, side)
            side.drop()
        elif v.kind is Kind.UNION:
            f = np.ones(world.n, dtype=bool)
            for c in v.children:
                f = f & vals.pop(id(c))
        elif v.kind is Kind.SUM:
            f = stretched_placements(world, vals.pop(id(v.children[0])), v.direction, v.length, k)
        else:
            f = shifted_placements(world, vals.pop(id(v.children[0])), v.direction, v.length, k)
        vals[id(v)] = f
    return vals[id(t)]


def _probe(world: World, t: SnowflakeTree, k: Register, trace: list, store: str) -> bool:
    """Run the placement search at scale ``k`` and vote whether any rotation has a placement."""
    ps = snowflake_placements(world, t, k)
    anyf = np.zeros(world.n, dtype=bool)
    for r in ROTATIONS:
        anyf |= ps.flags[r]
    found = world.global_or(anyf)
    trace.append((k.read() or 0, found))
    if found:
        for r in ROTATIONS:
            world.set(_flag_name(store, r), ps.flags[r])
    return found


def _result(world: World, k_reg: Register | None, found: bool, start_round: int, trace, store, strategy) -> SolveResult:
    if not found:
        for r in ROTATIONS:
            world.drop(_flag_name(store, r))
        return SolveResult(0, {r: set() for r in ROTATIONS}, world.round - start_round, trace, strategy)
    k_max = k_reg.read()
    placements = {r: world.positions(world.flag(_flag_name(store, r))) for r in ROTATIONS}
    return SolveResult(k_max, placements, world.round - start_round, trace, strategy)


def linear_scale_search(world: World, t: SnowflakeTree, K: Register, _start: int | None = None) -> SolveResult:
    """Try scales K, K-1, ... down to 1 and stop at the first with a placement."""
    start = world.round if _start is None else _start
    Counters.establish(world)
    trace: list[tuple[int, bool]] = []
    k = copy_register(K, Register(world, "lin.k"))
    while not is_zero(world, k):
        if _probe(world, t, k, trace, "best"):
            res = _result(world, k, True, start, trace, "best", "linear")
            k.drop()
            return res
        add_one = load_const(world, Register(world, "lin.one"), 1)
        add(world, k, add_one, k, subtract=True)
        add_one.drop()
    k.drop()
    return _result(world, None, False, start, trace, "best", "linear")


def binary_scale_search(
    world: World, t: SnowflakeTree, _start: int | None = None, keep: Register | None = None
) -> SolveResult:
    """Doubling up to the first failing scale, then bisection.

    Only correct when the shape is self-contained, i.e. star convex.  The
    maximum scale is copied into ``keep`` when given.
    """
    start = world.round if _start is None else _start
    Counters.establish(world)
    trace: list[tuple[int, bool]] = []
    low = load_const(world, Register(world, "bin.low"), 1)
    probe = Register(world, "bin.probe")
    if not _probe(world, t, low, trace, "best"):
        low.drop()
        probe.drop()
        return _result(world, None, False, start, trace, "best", "binary")
    while True:
        double(world, low, probe)
        if not _probe(world, t, probe, trace, "best"):
            break
        copy_register(probe, low)
    gap = copy_register(low, Register(world, "bin.gap"))
    while True:
        halve(world, gap, gap)
        if is_zero(world, gap):
            break
        add(world, low, gap, probe)
        if _probe(world, t, probe, trace, "best"):
            copy_register(probe, low)
    res = _result(world, low, True, start, trace, "best", "binary")
    if keep is not None:
        copy_register(low, keep)
    for reg in (low, probe, gap):
        reg.drop()
    return res


def solve(world: World, t: SnowflakeTree) -> SolveResult:
    """Maximum scale and all placements at that scale for the shape of ``t``."""
    shape = eval_tree(t)
    if shape.is_trivial():
        raise TrivialShape("the target shape must have at least two nodes")
    start = world.round
    Counters.establish(world)
    star, _ = is_star_convex(shape)
    if star:
        return binary_scale_search(world, t, _start=start)
    if not shape.faces:
        raise ValueError("a snowflake shape without faces is star convex")
    # every scale with a placement of S also has a placement of the unit triangle
    K = Register(world, "solve.K")
    bound = binary_scale_search(world, tri(Direction.E, 1), keep=K)
    if bound.k_max == 0:
        K.drop()
        return SolveResult(0, {r: set() for r in ROTATIONS}, world.round - start, [], "linear")
    res = linear_scale_search(world, t, K, _start=start)
    K.drop()
    return res


# ---------------------------------------------------------------------------
# placement construction


def shape_elements(s: Shape) -> list[tuple[str, object]]:
    """Fixed enumeration of all nodes, edges and faces; labels index into it from 1."""
    return (
        [("node", v) for v in sorted(s.nodes)]
        + [("edge", e) for e in sorted(s.edges)]
        + [("face", f) for f in sorted(s.faces)]
    )


def _rotate_element(el: tuple[str, object], r: int):
    kind, x = el
    if kind == "node":
        return kind, rotate60(x, r)
    if kind == "edge":
        a, b = edge_endpoints(x)
        return kind, canon_edge(rotate60(a, r), rotate60(b, r))
    return kind, face_from_corners(tuple(rotate60(c, r) for c in face_corners(x)))


def expected_labels(s: Shape, k: int, p, r: int) -> dict[GridPoint, tuple[str, object]]:
    """Host-side reference: the element of ``s`` each node of ``k*s`` rotated by ``r`` at ``p`` stands for."""
    out: dict[GridPoint, tuple[str, object]] = {}
    p = GridPoint(p[0], p[1])

    def at(v) -> GridPoint:
        w = rotate60(v, r)
        return GridPoint(p.x + k * w.x, p.y + k * w.y)

    for el in shape_elements(s):
        kind, x = el
        if kind == "node":
            out[at(x)] = el
        elif kind == "edge":
            a, b = edge_endpoints(x)
            pa, pb = at(a), at(b)
            step = GridPoint((pb.x - pa.x) // k, (pb.y - pa.y) // k)
            for i in range(1, k):
                out[GridPoint(pa.x + i * step.x, pa.y + i * step.y)] = el
        else:
            a, b, c = (at(q) for q in face_corners(x))
            u = GridPoint((b.x - a.x) // k, (b.y - a.y) // k)
            v = GridPoint((c.x - a.x) // k, (c.y - a.y) // k)
            for i in range(1, k):
                for j in range(1, k - i):
                    out[GridPoint(a.x + i * u.x + j * v.x, a.y + i * u.y + j * v.y)] = el
    return out


def construct_placement(world: World, t: SnowflakeTree, k: Register, p, r: int) -> dict[GridPoint, tuple[str, object]]:
    """Label every amoebot of the placement at ``p`` in rotation ``r`` with the element it represents.

    Edges are walked outward from already labeled nodes; afterwards each
    face's interior is flooded by one circuit started from its edges.
    """
    Counters.establish(world)
    s = eval_tree(t)
    elements = shape_elements(s)
    rotated = [_rotate_element(el, r) for el in elements]
    label_of = {el: i + 1 for i, el in enumerate(rotated)}
    p = GridPoint(p[0], p[1])
    idx = world.structure.index
    if p not in idx:
        raise InvalidPlacement(f"{p} is not an amoebot")
    label = np.zeros(world.n, dtype=np.int64)
    origin = GridPoint(0, 0)
    label[idx[p]] = label_of[("node", origin)]

    # edge walks in breadth-first order from the origin node
    adj: dict[GridPoint, list] = {}
    rs = {x for kind, x in rotated if kind == "edge"}
    for e in sorted(rs):
        a, b = edge_endpoints(e)
        adj.setdefault(a, []).append((b, e))
        adj.setdefault(b, []).append((a, e))
    seen_nodes = {origin}
    walked = set()
    queue = [origin]
    while queue:
        u = queue.pop(0)
        for w, e in adj.get(u, []):
            if e in walked:
                continue
            walked.add(e)
            d = direction_of(GridPoint(w.x - u.x, w.y - u.y))
            heads = label == label_of[("node", u)]
            ref = _chains_from_heads(world, heads, d)
            rel = pasc_compare(world, [ref], k)
            if rel is None:
                raise InvalidPlacement("the scale does not fit any segment")
            inner = ref.member & ~heads & (rel[0] == LT)
            end = ref.member & (rel[0] == EQ)
            if not world.global_or(end):
                raise InvalidPlacement(f"walk along {d.name} from node {u} left the structure")
            label[inner] = label_of[("edge", e)]
            label[end] = label_of[("node", w)]
            if w not in seen_nodes:
                seen_nodes.add(w)
                queue.append(w)
    world.set("construct.label", label)

    # one flood round per face
    for f in sorted(x for kind, x in rotated if kind == "face"):
        corners = face_corners(f)
        pm = world.singletons()
        free = label == 0
        pm[free] = 0
        beep = np.zeros((world.n, 12), dtype=bool)
        for a, b in ((corners[0], corners[1]), (corners[1], corners[2]), (corners[2], corners[0])):
            e = canon_edge(a, b)
            third = next(c for c in corners if c != a and c != b)
            d = direction_of(GridPoint(b.x - a.x, b.y - a.y))
            inward = [d.ccw(), d.ccw(2)] if _left_of(a, b, third) else [d.cw(), d.cw(2)]
            on_edge = label == label_of[("edge", e)]
            for di in inward:
                rows = np.flatnonzero(on_edge & world.has[:, di])
                beep[rows, pm[rows, pin(di, 0)]] = True
        inbox = world.round_exchange(pm, beep)
        heard = free & inbox[:, 0]
        label[heard] = label_of[("face", f)]
        world.set("construct.label", label)

    out = {}
    for i in np.flatnonzero(label):
        out[world.structure.points[i]] = elements[label[i] - 1]
    return out


def _left_of(a: GridPoint, b: GridPoint, c: GridPoint) -> bool:
    ax, ay = embed(a)
    bx, by = embed(b)
    cx, cy = embed(c)
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax) > 0


__all__ = [
    "InvalidPlacement",
    "SolveResult",
    "TrivialShape",
    "binary_scale_search",
    "construct_placement",
    "expected_labels",
    "linear_scale_search",
    "shape_elements",
    "snowflake_placements",
    "solve",
]

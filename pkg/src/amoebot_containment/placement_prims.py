"""Placement primitives: boundary distances, lines, triangles, stretching and shifting.

Every primitive takes and returns per-amoebot boolean arrays of candidate
placements for one rotation.  Lengths that depend on the scale are held in
counter registers; a register without any active counter means the length
does not fit into any segment, so the result is empty.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain_ops import (
    EQ,
    GT,
    LANES,
    LT,
    ChainRef,
    Register,
    Round,
    add_const,
    copy_register,
    counters,
    div,
    halve,
    line_heard,
    line_send,
    load_const,
    mul_const,
    pasc,
    pasc_compare,
    segment_chains,
)
from .runtime import World, pin
from .trigrid import Direction, GridPoint


@dataclass
class PlacementSet:
    """Candidate flags per rotation."""

    world: World
    flags: dict

    def positions(self, r: int) -> set[GridPoint]:
        return self.world.positions(self.flags[r])

    def as_sets(self) -> dict[int, set[GridPoint]]:
        return {r: self.positions(r) for r in sorted(self.flags)}

    def any(self) -> bool:
        return any(bool(f.any()) for f in self.flags.values())


def _empty(world: World) -> np.ndarray:
    return np.zeros(world.n, dtype=bool)


def boundary_distance(world: World, d: Direction) -> dict[GridPoint, list[int]]:
    """Each amoebot streams its distance to the segment end in direction ``d``.

    Returns the observed LSB-first bit streams per position.
    """
    d = Direction(d)
    ref = segment_chains(world, d.opposite())
    pts = world.structure.points
    streams: dict[GridPoint, list[int]] = {p: [] for p in pts}

    def tap(j: int, bits: list) -> None:
        for i, p in enumerate(pts):
            streams[p].append(int(bits[0][i]))

    pasc(world, [ref], tap)
    return streams


def stream_value(bits) -> int:
    return sum(int(b) << j for j, b in enumerate(bits))


def line_placements(world: World, d: Direction, length: Register) -> np.ndarray:
    """Amoebots whose distance to the boundary in direction ``d`` is at least ``length``."""
    d = Direction(d)
    ref = segment_chains(world, d.opposite())
    rel = pasc_compare(world, [ref], length)
    if rel is None:
        return _empty(world)
    return rel[0] != LT


def _chains_from_heads(world: World, heads: np.ndarray, succ_dir: Direction) -> ChainRef:
    """Chains starting at ``heads`` running in ``succ_dir`` up to the next head; 1 round."""
    back = succ_dir.opposite()
    has = world.has
    r = Round(world)
    r.merge(~heads & has[:, back] & has[:, succ_dir], pin(back, 0), pin(succ_dir, 0))
    r.send(heads & has[:, succ_dir], pin(succ_dir, 0))
    r.send(heads & has[:, back], pin(back, 1))
    r.run()
    member = heads | (r.got(pin(back, 0)) & has[:, back])
    next_is_head = r.got(pin(succ_dir, 1)) & has[:, succ_dir]
    return ChainRef(succ_dir, member, heads.copy(), member & has[:, succ_dir] & ~next_is_head)


def stretch(world: World, base: np.ndarray, d: Direction, length: Register) -> np.ndarray:
    """Placements of ``X + L(d, length)`` given the placements ``base`` of ``X``."""
    d = Direction(d)
    lines = line_placements(world, d, length)
    if not world.global_or(lines):
        return lines
    invalid = ~base
    ref = _chains_from_heads(world, invalid, d.opposite())
    rel = pasc_compare(world, [ref], length)
    if rel is None:
        return _empty(world)
    eliminated = ref.member & (rel[0] != GT)
    return lines & ~eliminated


def stretched_placements(world: World, base: np.ndarray, d: Direction, ell: int, k: Register) -> np.ndarray:
    length = mul_const(world, k, ell, Register(world, "stretch.len"))
    out = stretch(world, base, d, length)
    length.drop()
    return out


def shift_one(world: World, flags: np.ndarray, d: Direction) -> np.ndarray:
    """Move every flag one step in direction ``d`` along its segment; 1 round."""
    d = Direction(d)
    back = d.opposite()
    r = Round(world)
    r.send(flags & world.has[:, d], pin(d, 0))
    r.run()
    return r.got(pin(back, 0)) & world.has[:, back]


def _markers(world: World, heads: np.ndarray, d: Direction, k: Register) -> np.ndarray:
    """Amoebots at distance exactly ``k`` in direction ``d`` from a head, before the next head."""
    if not world.global_or(heads):
        return _empty(world)
    ref = _chains_from_heads(world, heads, d)
    rel = pasc_compare(world, [ref], k)
    if rel is None:
        return _empty(world)
    return ref.member & (rel[0] == EQ)


def shift_segmented(world: World, flags: np.ndarray, d: Direction, k: Register) -> np.ndarray:
    """Shift a k-segmented set by ``k`` in direction ``d`` within each maximal segment.

    Only run boundaries move.  Runs are ordered along ``d``; start points
    move by chains running up to the next start point and end points by
    chains running up to the next end point.  Only the first run and the
    last run may be shorter than ``k``, so two chains can be too short: the
    one from the first start point and the one from the second-to-last end
    point.  Those two get separate passes whose chains run to the end of the
    segment.
    """
    d = Direction(d)
    back = d.opposite()
    has = world.has
    C = np.asarray(flags, dtype=bool)
    fwd0, back0 = pin(d, 0), pin(back, 0)
    fwd1, back1 = pin(d, 1), pin(back, 1)

    r = Round(world)
    r.send(C & has[:, d], fwd0)
    r.send(C & has[:, back], back1)
    r.run()
    c_next = r.got(fwd1) & has[:, d]
    c_prev = r.got(back0) & has[:, back]
    start = C & ~c_prev
    end = C & ~c_next

    r = Round(world)
    r.merge(~C, back0, fwd0)
    r.merge(~C, back1, fwd1)
    r.send(C, fwd0)
    r.send(C, back1)
    r.run()
    first_start = start & ~(r.got(back0) & has[:, back])
    last_end = end & ~(r.got(fwd1) & has[:, d])

    r = Round(world)
    r.merge(C, back0, fwd0)
    r.send(last_end, fwd0)
    r.run()
    in_last = C & r.got(fwd0)

    r = Round(world)
    r.merge(~C, back0, fwd0)
    r.send(start & in_last, back0)
    r.run()
    second_last_end = end & ~in_last & r.got(fwd0) & has[:, d]

    start_mark = _markers(world, start & ~first_start, d, k) | _markers(world, first_start, d, k)
    end_mark = _markers(world, end & ~second_last_end, d, k) | _markers(world, second_last_end, d, k)

    r = Round(world)
    marker = start_mark | end_mark
    r.merge(~marker, back0, fwd0)
    r.send(start_mark & ~end_mark, fwd0)
    r.run()
    return start_mark | (r.got(back0) & has[:, back])


def shifted_placements(world: World, base: np.ndarray, d: Direction, ell: int, k: Register) -> np.ndarray:
    """Placements of ``(X + ell*k*u_d) ∪ L(d, ell*k)`` from the placements ``base`` of ``X``.

    ``X`` must have positive width on the axis of ``d``, so that the
    invalid placements form a k-segmented set.
    """
    d = Direction(d)
    length = mul_const(world, k, ell, Register(world, "shift.len"))
    lines = line_placements(world, d, length)
    length.drop()
    if not world.global_or(lines):
        return lines
    moved = ~base
    for _ in range(ell):
        moved = shift_segmented(world, moved, d.opposite(), k)
    return lines & ~moved


shifted_shape_placements = shifted_placements


def triangle_pieces(d1: Direction, side: int) -> tuple[frozenset, frozenset, frozenset]:
    """Node sets of the three pieces whose placements ``triangle_placements`` intersects.

    With ``h = side // 2`` and ``h2 = side - h``: a parallelogram with both
    sides ``h``, and for ``(da, db)`` in ``((d1, d3), (d2, -d3))`` the line
    ``L(da, h2)`` joined with a parallelogram ``L(da, h) + L(db, h2)`` moved
    ``h2`` steps along ``da``.
    """
    d1 = Direction(d1)
    d2 = d1.ccw()
    d3 = d2.ccw()
    h = side // 2
    h2 = side - h

    def para(da: Direction, a: int, db: Direction, b: int, at: GridPoint) -> set:
        ua, ub = da.vec, db.vec
        return {at + ua * i + ub * j for i in range(a + 1) for j in range(b + 1)}

    origin = GridPoint(0, 0)
    p1 = para(d1, h, d2, h, origin)

    def piece(da: Direction, db: Direction) -> set:
        return para(da, h2, db, 0, origin) | para(da, h, db, h2, da.vec * h2)

    return frozenset(p1), frozenset(piece(d1, d3)), frozenset(piece(d2, d3.opposite()))


def triangle_placements(world: World, d1: Direction, side: Register) -> np.ndarray:
    """Placements of the triangle with side ``side`` spanned by ``d1`` and ``ccw(d1)``.

    The triangle is covered by three parallelogram-based pieces whose
    lengths are the two halves of ``side``.
    """
    d1 = Direction(d1)
    d2 = d1.ccw()
    d3 = d2.ccw()
    lanes = counters(world).refs
    half = Register(world, "tri.h")
    upper = Register(world, "tri.h2")
    halve(world, side, half)
    parity = np.zeros(world.n, dtype=bool)
    for a in LANES:
        parity |= side.on(a) & lanes[a].head & side.bits(a)
    odd = world.global_or(parity)
    if odd:
        add_const(world, half, 1, upper)
    else:
        copy_register(half, upper)

    def piece(da: Direction, db: Direction) -> np.ndarray:
        q = stretch(world, line_placements(world, da, half), db, upper)
        moved = shift_segmented(world, ~q, da.opposite(), half)
        if odd:
            moved = shift_one(world, moved, da.opposite())
        return line_placements(world, da, upper) & ~moved

    base = line_placements(world, d1, half)
    out = stretch(world, base, d2, half)
    out &= piece(d1, d3)
    out &= piece(d2, d3.opposite())
    half.drop()
    upper.drop()
    return out


def solve_unit_line(world: World, d: Direction, ell: int = 1) -> tuple[Register, np.ndarray]:
    """Longest segments on the axis of ``d`` and the placements of ``L(d, ell*k)`` at the largest k.

    Segment lengths are streamed by PASC to the segment ends, which hand
    each bit to a marker walking from the segment start.  An MSB-first
    tournament over the global circuit then retires every segment shorter
    than the longest one.
    """
    d = Direction(d)
    a = int(d.axis)
    ref = counters(world).refs[a]
    n = world.n
    bits = np.zeros(n, dtype=bool)
    mk = ref.head.copy()
    fell = np.zeros(n, dtype=bool)

    def store(j: int, streamed: list) -> None:
        nonlocal mk, bits, fell
        b = streamed[0] & ref.last
        r = Round(world)
        r.chain_line(ref, 0)
        line_send(r, ref, 0, b)
        p1, s1 = ref.pins(1)
        r.send(mk & ref.has_succ, s1)
        r.run()
        heard = line_heard(r, ref, 0, b)
        bits = bits | (mk & heard)
        fell = fell | (mk & ~ref.has_succ)
        mk = r.got(p1) & ref.has_pred

    iters = pasc(world, [ref], store)
    r = Round(world)
    r.chain_line(ref, 0)
    line_send(r, ref, 0, fell)
    r.run()
    surv = ~line_heard(r, ref, 0, fell)
    if iters:
        r = Round(world)
        p1, s1 = ref.pins(1)
        r.send(mk & ref.has_pred, p1)
        r.run()
        mk = r.got(s1) & ref.has_succ
        for step in range(iters - 1, -1, -1):
            one = world.global_or(surv & mk & bits)
            r = Round(world)
            r.chain_line(ref, 0)
            lose = surv & mk & ~bits & one
            line_send(r, ref, 0, lose)
            if step:
                r.send(mk & ref.has_pred, p1)
            r.run()
            surv = surv & ~line_heard(r, ref, 0, lose)
            if step:
                mk = r.got(s1) & ref.has_succ
    m = Register(world, "unit.m")
    for b in LANES:
        if b == a:
            m.put(b, bits & surv, surv)
        else:
            m.put(b, np.zeros(n, dtype=bool), np.zeros(n, dtype=bool))
    if ell == 1:
        k = m
    else:
        c = load_const(world, Register(world, "unit.c"), ell)
        k = div(world, m, c, Register(world, "unit.k"))
        c.drop()
    length = mul_const(world, k, ell, Register(world, "unit.len"))
    flags = line_placements(world, d, length)
    length.drop()
    return k, flags


__all__ = [
    "PlacementSet",
    "boundary_distance",
    "line_placements",
    "shift_one",
    "shift_segmented",
    "shifted_placements",
    "shifted_shape_placements",
    "solve_unit_line",
    "stream_value",
    "stretch",
    "stretched_placements",
    "triangle_pieces",
    "triangle_placements",
]

import random

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from amoebot_containment.chain_ops import Counters, Register
from amoebot_containment.oracle import boundary_scan, gen_random_snowflake, gen_random_structure, oracle_placements
from amoebot_containment.placement_prims import (
    PlacementSet,
    boundary_distance,
    line_placements,
    shift_one,
    shift_segmented,
    shifted_placements,
    solve_unit_line,
    stream_value,
    stretched_placements,
    triangle_pieces,
    triangle_placements,
)
from amoebot_containment.runtime import new_world
from amoebot_containment.shapes import (
    axis_width,
    eval_tree,
    make_line,
    make_triangle,
    minkowski_with_line,
    parse_snowflake,
    scale,
    shift,
    ssum,
)
from amoebot_containment.trigrid import UNIT, Direction, GridPoint

from support import flags_of, line_points, world_with_k

E, NE, NW, W, SW, SE = Direction
seeds = st.integers(0, 10**6)
directions = st.sampled_from(list(Direction))


def test_boundary_distance_examples():
    w = new_world(line_points(7))
    got = {p: stream_value(b) for p, b in boundary_distance(w, E).items()}
    assert got[GridPoint(6, 0)] == 0 and got[GridPoint(0, 0)] == 6
    w = new_world(make_triangle(E, 3).nodes)
    assert stream_value(boundary_distance(w, E)[GridPoint(0, 1)]) == 2


@given(st.integers(1, 80), seeds, directions)
def test_boundary_distance_matches_scan(n, seed, d):
    pts = gen_random_structure(n, seed)
    w = new_world(pts)
    got = {p: stream_value(b) for p, b in boundary_distance(w, d).items()}
    assert got == boundary_scan(pts, d)


def test_line_placements_examples():
    w, k = world_with_k(line_points(7), 3)
    assert w.positions(line_placements(w, E, k)) == {GridPoint(x, 0) for x in range(4)}
    k.load(0)
    assert line_placements(w, E, k).all()
    k.load(7)
    assert not line_placements(w, E, k).any()


def test_solve_unit_line_examples():
    pts = [GridPoint(x, 0) for x in range(3)]
    pts += [GridPoint(x - 1, 1) for x in range(5)]
    pts += [GridPoint(x - 2, 2) for x in range(5)]
    w = new_world(pts)
    Counters.establish(w)
    k, flags = solve_unit_line(w, E)
    assert k.read() == 4
    assert w.positions(flags) == {GridPoint(-1, 1), GridPoint(-2, 2)}
    w = new_world([GridPoint(0, 0)])
    Counters.establish(w)
    k, _ = solve_unit_line(w, E)
    assert not k.read()


@given(st.integers(1, 100), seeds, directions, st.integers(1, 3))
def test_solve_unit_line_matches_scan(n, seed, d, ell):
    pts = gen_random_structure(n, seed)
    w = new_world(pts)
    Counters.establish(w)
    k, flags = solve_unit_line(w, d, ell)
    want = max(boundary_scan(pts, d).values()) // ell
    assert (k.read() or 0) == want
    if want:
        assert w.positions(flags) == oracle_placements(pts, make_line(d, 1), want * ell, 0)


def test_triangle_piece_lengths():
    p1, p2, p3 = triangle_pieces(E, 5)
    assert p1 == {GridPoint(i, j) for i in range(3) for j in range(3)}
    assert {GridPoint(i, 0) for i in range(4)} <= p2
    assert p1 | p2 | p3 == make_triangle(E, 5).nodes


def test_triangle_placements_examples():
    w, k = world_with_k(make_triangle(E, 4).nodes, 4)
    assert w.positions(triangle_placements(w, E, k)) == {GridPoint(0, 0)}


@given(st.integers(3, 120), seeds, directions, st.integers(1, 6))
def test_triangle_placements_match_oracle(n, seed, d, side):
    pts = gen_random_structure(n, seed)
    w, k = world_with_k(pts, side)
    assert w.positions(triangle_placements(w, d, k)) == oracle_placements(pts, make_triangle(d, 1), side, 0)


def test_stretched_examples():
    rhombus = minkowski_with_line(make_line(NE, 1), E, 1)
    pts = scale(rhombus, 2).nodes
    w, k = world_with_k(pts, 2)
    base = line_placements(w, NE, _len(w, 2))
    assert w.positions(stretched_placements(w, base, E, 1, k)) == {GridPoint(0, 0)}
    w, k = world_with_k(line_points(9), 2)
    everyone = np.ones(w.n, dtype=bool)
    want = line_placements(w, E, _len(w, 4))
    assert (stretched_placements(w, everyone, E, 2, k) == want).all()


def _len(w, v):
    r = Register(w, f"len{v}")
    r.load(v)
    return r


@given(st.integers(5, 120), seeds, directions, st.integers(1, 2), st.integers(1, 3))
def test_stretched_match_oracle(n, seed, d, ell, kv):
    pts = gen_random_structure(n, seed)
    child = gen_random_snowflake(3, seed)
    S = eval_tree(child)
    w, k = world_with_k(pts, kv)
    base = flags_of(w, oracle_placements(pts, S, kv, 0))
    got = w.positions(stretched_placements(w, base, d, ell, k))
    assert got == oracle_placements(pts, eval_tree(ssum(d, ell, child)), kv, 0)


def test_shift_segmented_examples():
    w, k = world_with_k(line_points(10), 2)
    c = flags_of(w, [GridPoint(x, 0) for x in (0, 1, 2, 6, 7, 8, 9)])
    assert w.positions(shift_segmented(w, c, E, k)) == {GridPoint(x, 0) for x in (2, 3, 4, 8, 9)}
    assert not shift_segmented(w, np.zeros(w.n, dtype=bool), E, k).any()


def test_shift_one():
    w = new_world(line_points(4))
    f = flags_of(w, [GridPoint(0, 0), GridPoint(3, 0)])
    assert w.positions(shift_one(w, f, E)) == {GridPoint(1, 0)}


def _segmented_set(pts, d, k, rng):
    """Random flags whose runs and gaps on every segment are at least ``k`` long, except at the ends."""
    occ = set(pts)
    chosen = set()
    for p in occ:
        if p - UNIT[d] in occ:
            continue
        run = [p]
        while run[-1] + UNIT[d] in occ:
            run.append(run[-1] + UNIT[d])
        i, on = 0, rng.random() < 0.5
        first = True
        while i < len(run):
            length = rng.randint(0 if first else k, k + 3)
            if on:
                chosen.update(run[i : i + length])
            i += length
            on = not on
            first = False
    return chosen


@given(st.integers(2, 120), seeds, directions, st.integers(1, 5))
def test_shift_segmented_matches_set_shift(n, seed, d, kv):
    rng = random.Random(seed)
    pts = gen_random_structure(n, seed)
    chosen = _segmented_set(pts, d, kv, rng)
    w, k = world_with_k(pts, kv)
    got = w.positions(shift_segmented(w, flags_of(w, chosen), d, k))
    occ = set(pts)
    want = set()
    for p in chosen:
        q = p
        for _ in range(kv):
            q = q + UNIT[d]
            if q not in occ:
                break
        else:
            want.add(q)
    assert got == want


def test_shifted_examples():
    t = parse_snowflake("(shift E 2 (sum NE 1 (line E 1)))")
    pts = eval_tree(t).nodes
    w, k = world_with_k(pts, 1)
    child = t.children[0]
    base = flags_of(w, oracle_placements(pts, eval_tree(child), 1, 0))
    assert w.positions(shifted_placements(w, base, E, 2, k)) == {GridPoint(0, 0)}


@given(st.integers(5, 120), seeds, directions, st.integers(1, 2), st.integers(1, 3))
def test_shifted_match_oracle(n, seed, d, ell, kv):
    child = None
    for s in range(seed, seed + 50):
        c = gen_random_snowflake(3, s)
        if axis_width(eval_tree(c), d.axis) > 0:
            child = c
            break
    if child is None:
        return
    pts = gen_random_structure(n, seed)
    w, k = world_with_k(pts, kv)
    base = flags_of(w, oracle_placements(pts, eval_tree(child), kv, 0))
    got = w.positions(shifted_placements(w, base, d, ell, k))
    assert got == oracle_placements(pts, eval_tree(shift(d, ell, child)), kv, 0)


def test_shifted_wide_unit_step():
    wide = parse_snowflake("(sum NE 1 (line E 2))")
    S = eval_tree(wide)
    for kv in (1, 2, 3):
        pts = scale(eval_tree(shift(E, 1, wide)), kv).nodes
        w, k = world_with_k(pts, kv)
        base = flags_of(w, oracle_placements(pts, S, kv, 0))
        assert GridPoint(0, 0) in w.positions(shifted_placements(w, base, E, 1, k))


def test_placement_set_views():
    w = new_world(line_points(3))
    ps = PlacementSet(w, {0: np.array([True, False, True]), 1: np.zeros(3, dtype=bool)})
    assert ps.as_sets() == {0: {GridPoint(0, 0), GridPoint(2, 0)}, 1: set()}
    assert ps.any()

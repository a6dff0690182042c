"""Acceptance gate: one test per criterion, reported as PASS/FAIL in the terminal summary."""

import itertools
import math
import random
import time

import numpy as np
import pytest

from amoebot_containment.chain_ops import Counters, Register, counter_arith, pasc_streams, segment_chains
from amoebot_containment.cli import BENCH_SNOWFLAKE, bench_row
from amoebot_containment.oracle import (
    gen_lower_bound,
    gen_random_snowflake,
    gen_random_structure,
    numeric_axis_width,
    oracle_all_rotations,
    oracle_kmax,
    oracle_placements,
    oracle_self_contained,
    two_arm_shape,
)
from amoebot_containment.placement_prims import triangle_pieces
from amoebot_containment.runtime import new_world
from amoebot_containment.shapes import (
    ConvexSides,
    Shape,
    axis_width,
    convex_fits,
    eval_tree,
    is_star_convex,
    make_line,
    make_triangle,
    parse_snowflake,
    scale,
    shape_from_sides,
)
from amoebot_containment.solver import (
    construct_placement,
    expected_labels,
    snowflake_placements,
    solve,
)
from amoebot_containment.trigrid import Axis, Direction, GridPoint

from support import host_structure, line_points, nontrivial_tree, parallelogram_points, world_with_k

# frozen round-regression constants
C1, C2 = 8, 8
C3, C4 = 600, 2000
C5, C6 = 400, 3000


def test_criterion_01_placement_oracle_equivalence():
    t0 = time.perf_counter()
    failures = []
    for i in range(200):
        rng = random.Random(1000 + i)
        t, _ = nontrivial_tree(1000 + i)
        shape = eval_tree(t)
        k = rng.randint(1, 4)
        fit_k = rng.choice([k, k, max(0, k - 1)])
        points = host_structure(shape, fit_k, rng.randint(40, 400), 1000 + i)
        if len(points) > 400:
            points = gen_random_structure(400, 1000 + i)
        w, kreg = world_with_k(points, k)
        got = snowflake_placements(w, t, kreg).as_sets()
        want = oracle_all_rotations(points, shape, k)
        if got != want:
            failures.append((i, k))
    elapsed = time.perf_counter() - t0
    assert not failures, failures[:5]
    assert elapsed < 300, f"{elapsed:.1f}s"


def _kmax_instances():
    out = []
    for i in range(75):
        t, _ = nontrivial_tree(5000 + i, max_nodes=5)
        out.append(t)
    for i in range(25):
        t, _ = nontrivial_tree(9000 + i, max_nodes=6, star=False)
        out.append(t)
    return out


def test_criterion_02_kmax_oracle_equivalence():
    failures = []
    for i, t in enumerate(_kmax_instances()):
        rng = random.Random(i)
        shape = eval_tree(t)
        k = rng.randint(0, 3)
        points = host_structure(shape, k, rng.randint(20, 160), i)
        res = solve(new_world(points), t)
        want = oracle_kmax(points, shape)
        if res.k_max != want:
            failures.append(("k_max", i, res.k_max, want))
            continue
        if res.strategy == "binary":
            probed = max((p for p, _ in res.search_trace), default=0)
            if probed > max(1, 2 * want):
                failures.append(("probe", i, probed, want))
        if want:
            for r in range(6):
                if res.placements[r] != oracle_placements(points, shape, want, r):
                    failures.append(("placements", i, r))
                    break
    assert not failures, failures[:5]


_OPS = ["add", "sub", "double", "halve", "compare", "mul", "div", "mod"]
_CONSTANT_OPS = {"add", "sub", "double", "halve", "compare"}


def _host(op, a, b, m):
    if op == "compare":
        return "<" if a < b else "=" if a == b else ">"
    v = {
        "add": lambda: a + b,
        "sub": lambda: a - b,
        "double": lambda: 2 * a,
        "halve": lambda: a // 2,
        "mul": lambda: a * b,
        "div": lambda: a // b,
        "mod": lambda: a % b,
    }[op]()
    return v if 0 <= v < 1 << m else None


def test_criterion_03_chain_arithmetic():
    m = 16
    w = new_world(line_points(m))
    Counters.establish(w)
    A, B = Register(w, "a"), Register(w, "b")
    rng = random.Random(3)
    worst = {}
    for op in _OPS:
        for j in range(1000):
            if op == "mul" and j % 2:
                a, b = rng.randrange(1 << 8), rng.randrange(1 << 8)
            else:
                a, b = rng.randrange(1 << m), rng.randrange(1 << m)
            if op in ("div", "mod") and b == 0:
                b = 1
            A.load(a)
            B.load(b)
            r0 = w.round
            res = counter_arith(w, op, A, B)
            got = res if op == "compare" else res.read()
            assert got == _host(op, a, b, m), (op, a, b, got)
            worst[op] = max(worst.get(op, 0), w.round - r0)
    for op, rounds in worst.items():
        assert rounds <= (8 if op in _CONSTANT_OPS else 8 * m), (op, rounds)


def test_criterion_04_pasc():
    for m in range(1, 65):
        w = new_world(line_points(m))
        ref = segment_chains(w, Direction.E)
        streams, iters = pasc_streams(w, [ref])
        for p, bits in streams[0].items():
            assert sum(b << j for j, b in enumerate(bits)) == p.x
            assert len(bits) == iters
        assert iters == (math.ceil(math.log2(m)) if m >= 2 else 0)
    pts = parallelogram_points(9, 6)
    solo = []
    for d in (Direction.E, Direction.NE):
        w = new_world(pts)
        solo.append(pasc_streams(w, [segment_chains(w, d)])[0][0])
    w = new_world(pts)
    together, _ = pasc_streams(w, [segment_chains(w, Direction.E), segment_chains(w, Direction.NE)])
    for s, t in zip(solo, together):
        assert {p: _value(b) for p, b in s.items()} == {p: _value(b) for p, b in t.items()}


def _value(bits):
    return sum(b << j for j, b in enumerate(bits))


def test_criterion_05_lower_bound_family():
    S = two_arm_shape()
    for k in (4, 6, 8):
        pts, expected = gen_lower_bound(k, "1" * k)
        assert len(pts) == 3 * k * k + 2 * k
        assert oracle_kmax(pts, S) == k
        assert oracle_placements(pts, S, k, 0) == expected
        rng = random.Random(k)
        for _ in range(10):
            mask = [rng.random() < 0.5 for _ in range(k)]
            if not any(mask):
                mask[rng.randrange(k)] = True
            pts, expected = gen_lower_bound(k, mask)
            got = oracle_all_rotations(pts, S, k)
            assert got[0] == expected
            assert all(not got[r] for r in range(1, 6))
    assert len(gen_lower_bound(6, "1" * 6)[0]) == 120


_STAR_FIXTURES = [
    "(line E 1)",
    "(line NE 3)",
    "(tri E 1)",
    "(tri SW 2)",
    "(sum E 2 (line NE 1))",
    "(sum NW 1 (tri E 1))",
    "(union (line E 2) (line W 2))",
    "(union (line E 1) (line NE 1) (line NW 1) (line W 1) (line SW 1) (line SE 1))",
    "(union (tri E 1) (tri W 1))",
    "(union (line E 2) (tri NE 1))",
]
_NON_STAR_FIXTURES = [
    "(union (tri NE 1) (shift W 2 (sum NE 1 (line E 1))))",
    "(union (shift SE 1 (sum SE 1 (tri W 1))) (tri NE 1))",
    "(union (line SE 1) (shift W 2 (sum W 2 (line NW 1))))",
    "(union (shift NE 2 (sum E 1 (line NE 2))) (line NW 1))",
]


def test_criterion_06_star_convex_iff_self_contained():
    for text in _STAR_FIXTURES:
        S = eval_tree(parse_snowflake(text))
        assert is_star_convex(S)[0], text
        for k in range(1, 6):
            assert oracle_self_contained(S, k, k + 1), (text, k)
    non_star = [eval_tree(parse_snowflake(text)) for text in _NON_STAR_FIXTURES] + [two_arm_shape()]
    for S in non_star:
        assert not is_star_convex(S)[0]
        bound = 3 * (S.diameter() + 2)
        assert any(not oracle_self_contained(S, k, k + 1) for k in range(1, bound + 1))


def test_criterion_07_triangle_decomposition():
    for d in Direction:
        for ell in range(1, 33):
            p1, p2, p3 = triangle_pieces(d, ell)
            assert p1 | p2 | p3 == make_triangle(d, ell).nodes, (d, ell)


def test_criterion_08_width_checker():
    checked = 0
    seed = 0
    while checked < 50:
        t = gen_random_snowflake(random.Random(seed).randint(1, 6), seed)
        seed += 1
        s = eval_tree(t)
        if s.is_trivial():
            continue
        for a in Axis:
            assert abs(axis_width(s, a) - numeric_axis_width(s, a)) <= 1e-9, (t, a)
        checked += 1
    for d in Direction:
        for a in Axis:
            assert axis_width(make_triangle(d, 3), a) == 0
        for ell in (1, 2, 5):
            assert axis_width(make_line(d, ell), d.axis) == ell
    for seed in range(10):
        s = eval_tree(gen_random_snowflake(5, seed))
        for k in (2, 3):
            for a in Axis:
                assert axis_width(scale(s, k), a) == k * axis_width(s, a)


def _side_family():
    return [ConvexSides(*s) for s in itertools.product(range(5), repeat=6) if ConvexSides(*s).is_closed()]


def _erosion_fits(shapes):
    """fits[i][j]: some grid translation puts shapes[i] inside shapes[j], by bitmap erosion."""
    size = 1 + max(max(p.x for p in s.nodes) - min(p.x for p in s.nodes) for s in shapes)
    size = max(size, 1 + max(max(p.y for p in s.nodes) - min(p.y for p in s.nodes) for s in shapes))
    boards = np.zeros((len(shapes), 2 * size, 2 * size), dtype=bool)
    for j, s in enumerate(shapes):
        x0, y0 = min(p.x for p in s.nodes), min(p.y for p in s.nodes)
        for p in s.nodes:
            boards[j, p.x - x0, p.y - y0] = True
    fits = np.zeros((len(shapes), len(shapes)), dtype=bool)
    for i, s in enumerate(shapes):
        x0, y0 = min(p.x for p in s.nodes), min(p.y for p in s.nodes)
        ok = np.ones((len(shapes), size, size), dtype=bool)
        for p in s.nodes:
            ox, oy = p.x - x0, p.y - y0
            ok &= boards[:, ox : ox + size, oy : oy + size]
        fits[i] = ok.reshape(len(shapes), -1).any(axis=1)
    return fits


def test_criterion_09_convex_fit():
    family = _side_family()
    shapes = [shape_from_sides(s) for s in family]
    brute = _erosion_fits(shapes)
    mismatches = [
        (family[i], family[j])
        for i in range(len(family))
        for j in range(len(family))
        if convex_fits(family[i], family[j]) != brute[i, j]
    ]
    assert not mismatches, mismatches[:5]


def test_criterion_10_round_regressions():
    for e in range(4, 13):
        n = 2**e
        row = bench_row("line", n)
        assert row["rounds"] <= C1 * math.log2(n) + C2, row
    for k in (2, 4, 8, 16, 32, 64):
        row = bench_row("triangle", k)
        assert row["k_max"] == k
        assert row["rounds"] <= C3 * math.log2(row["k_max"] + 2) ** 2 + C4, row
    t = parse_snowflake(BENCH_SNOWFLAKE)
    assert not is_star_convex(eval_tree(t))[0]
    for k in range(1, 7):
        row = bench_row("snowflake", k)
        assert row["k_max"] == k
        assert row["rounds"] <= C5 * row["feature"] + C6, row


def test_criterion_11_constant_memory():
    sizes = []
    for n in (64, 256, 1024):
        w = new_world(line_points(n), audit_interval=1)
        res = solve(w, parse_snowflake("(line E 1)"))
        assert res.k_max == n - 1
        w.audit()
        sizes.append(w.max_state_bytes)
    assert len(set(sizes)) == 1, sizes


def test_criterion_12_placement_construction():
    done = 0
    seed = 0
    while done < 50:
        t, used = nontrivial_tree(20_000 + seed, max_nodes=5)
        seed += 1
        shape = eval_tree(t)
        k = random.Random(used).randint(1, 3)
        points = host_structure(shape, k, 80, used)
        w = new_world(points)
        res = solve(w, t)
        if res.k_max == 0:
            continue
        r = min(r for r in range(6) if res.placements[r])
        p = min(res.placements[r])
        kreg = Register(w, "construct.k")
        kreg.load(res.k_max)
        labels = construct_placement(w, t, kreg, p, r)
        want = expected_labels(shape, res.k_max, p, r)
        assert labels == want, (t, p, r)
        # each element's preimage is nonempty and the preimages partition the placement
        by_element = {}
        for q, el in labels.items():
            by_element.setdefault(el, set()).add(q)
        covered = set().union(*by_element.values())
        assert covered == set(want)
        assert sum(len(v) for v in by_element.values()) == len(covered)
        assert {el for el in by_element if el[0] == "node"} == {("node", v) for v in shape.nodes}
        done += 1

"""Shared fixtures for the test modules."""

import random

import numpy as np

from amoebot_containment.chain_ops import Counters, Register
from amoebot_containment.oracle import gen_random_snowflake, gen_random_structure, grow_structure
from amoebot_containment.runtime import new_world
from amoebot_containment.shapes import eval_tree, is_star_convex, scale
from amoebot_containment.trigrid import GridPoint


def flags_of(world, points) -> np.ndarray:
    f = np.zeros(world.n, dtype=bool)
    for p in points:
        f[world.structure.index[GridPoint(p[0], p[1])]] = True
    return f


def world_with_k(points, k: int):
    w = new_world(points)
    Counters.establish(w)
    reg = Register(w, "k")
    reg.load(k)
    return w, reg


def line_points(n: int):
    return [GridPoint(x, 0) for x in range(n)]


def parallelogram_points(a: int, b: int):
    return [GridPoint(x, y) for x in range(a) for y in range(b)]


def nontrivial_tree(seed, max_nodes=7, star=None):
    """First random snowflake from ``seed`` onwards with at least two nodes (and given star convexity)."""
    s = seed
    while True:
        rng = random.Random(s)
        t = gen_random_snowflake(rng.randint(1, max_nodes), s)
        shape = eval_tree(t)
        if not shape.is_trivial() and (star is None or is_star_convex(shape)[0] == star):
            return t, s
        s += 10_007


def host_structure(shape, k: int, n: int, seed):
    """A random structure grown around a copy of ``k*shape`` so placements exist."""
    core = scale(shape, k).nodes if k else {GridPoint(0, 0)}
    return grow_structure(core, max(n, len(core)), seed)


def random_structure(n: int, seed):
    return gen_random_structure(n, seed)

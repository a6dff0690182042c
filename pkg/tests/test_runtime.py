import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st
from scipy.sparse.csgraph import connected_components

from amoebot_containment.oracle import gen_random_structure
from amoebot_containment.runtime import (
    PINS,
    Disconnected,
    DuplicatePoint,
    HandlerStateOverflow,
    PinConfig,
    RoundLimitExceeded,
    ScalarHandler,
    StructureError,
    audit_state_size,
    circuit_labels,
    format_structure_text,
    load_structure,
    new_world,
    parse_structure_text,
    pin,
    recv_on,
    run_phase,
    step,
)
from amoebot_containment.shapes import make_triangle, scale
from amoebot_containment.trigrid import Direction, GridPoint

from support import line_points


def test_load_structure_examples():
    s = load_structure([(0, 0), (1, 0), (2, 0)])
    assert len(s) == 3 and s.has[s.index[GridPoint(1, 0)]].sum() == 2
    with pytest.raises(Disconnected):
        load_structure([(0, 0), (2, 0)])
    tri = load_structure(scale(make_triangle(Direction.E, 1), 2).nodes)
    assert len(tri) == 6
    with pytest.raises(DuplicatePoint):
        load_structure([(0, 0), (0, 0)])
    with pytest.raises(StructureError):
        load_structure([])


def test_structure_text_roundtrip():
    pts = gen_random_structure(30, 4)
    text = format_structure_text(pts, "random\nsecond line")
    assert text.startswith("# random\n# second line\n")
    assert parse_structure_text(text).occupied == pts
    with pytest.raises(StructureError):
        parse_structure_text("0 0\n1\n")
    with pytest.raises(StructureError):
        parse_structure_text("0 x\n")


def test_neighbor_beep_reaches_only_facing_set():
    w = new_world(line_points(3))
    pm = w.singletons()
    beep = np.zeros((w.n, PINS), dtype=bool)
    beep[0, pin(Direction.E, 0)] = True
    inbox = w.round_exchange(pm, beep)
    heard = {(i, p) for i, p in zip(*np.nonzero(inbox))}
    assert heard == {(0, pin(Direction.E, 0)), (1, pin(Direction.W, 0))}
    assert w.round == 1


def test_global_circuit_reaches_everyone():
    w = new_world(gen_random_structure(40, 2))
    pm = np.zeros((w.n, PINS), dtype=np.int64)
    beep = np.zeros((w.n, PINS), dtype=bool)
    beep[17, 0] = True
    inbox = w.round_exchange(pm, beep)
    assert inbox[:, 0].all()


def test_silence_stays_silent():
    w = new_world(gen_random_structure(25, 3))
    inbox = w.round_exchange(w.singletons(), np.zeros((w.n, PINS), dtype=bool))
    assert not inbox.any()


def test_global_or_costs_one_round():
    w = new_world(line_points(5))
    f = np.zeros(w.n, dtype=bool)
    assert w.global_or(f) is False
    f[3] = True
    assert w.global_or(f, np.zeros(w.n, dtype=bool)) == (True, False)
    assert w.round == 2


def _scipy_labels(total, a, b):
    g = sp.coo_matrix((np.ones(len(a)), (a, b)), shape=(total, total))
    return connected_components(g, directed=False)[1]


def _same_partition(x, y) -> bool:
    pairs = set(zip(x.tolist(), y.tolist()))
    return len(pairs) == len(set(x.tolist())) == len(set(y.tolist()))


@given(st.integers(2, 60), st.integers(0, 10**6))
def test_circuit_labels_match_scipy_on_random_configs(n, seed):
    rng = np.random.default_rng(seed)
    w = new_world(gen_random_structure(n, seed))
    pm = rng.integers(0, 3, size=(w.n, PINS))
    gid = (w._base + pm).ravel()
    a, b = gid[w._la], gid[w._lb]
    mine = circuit_labels(w.n * PINS, a, b)
    assert _same_partition(mine, _scipy_labels(w.n * PINS, a, b))


@given(st.integers(1, 200), st.integers(0, 400), st.integers(0, 10**6))
def test_circuit_labels_match_scipy_on_random_graphs(total, m, seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, total, size=m)
    b = rng.integers(0, total, size=m)
    mine = circuit_labels(total, a, b)
    assert _same_partition(mine, _scipy_labels(total, a, b))
    # every label names a member of its own component
    assert (mine[mine] == mine).all()


def test_circuit_labels_without_links():
    assert circuit_labels(4, np.array([], dtype=np.int64), np.array([], dtype=np.int64)).tolist() == [0, 1, 2, 3]


def test_scalar_handler_matches_semantics():
    # amoebot 0 beeps east on lane 0; every amoebot forwards by joining W and E lane-0 pins
    w = new_world(line_points(4))
    chain = PinConfig([(pin(Direction.W, 0), pin(Direction.E, 0))])

    def send(local):
        return chain, ([pin(Direction.E, 0)] if local.i == 0 else [])

    def receive(local, got):
        local["heard"] = int(got[pin(Direction.W, 0)])

    step(w, ScalarHandler(send, receive))
    # the sender's merged set is part of the circuit, so it hears itself too
    assert w.get("heard").tolist() == [1, 1, 1, 1]


def test_pin_config_validation():
    with pytest.raises(ValueError):
        PinConfig([(0, 1), (1, 2)])
    with pytest.raises(ValueError):
        PinConfig([()])
    assert PinConfig.all_in_one().set_of(11) == 0


def test_run_phase_noop_terminates_fast():
    w = new_world(line_points(6))
    handler = ScalarHandler(lambda local: (PinConfig(), []), lambda local, got: None)
    _, used = run_phase(w, handler)
    assert used <= 2


def test_run_phase_round_cap():
    w = new_world(line_points(6), round_cap=10)
    handler = ScalarHandler(lambda local: (PinConfig(), []), lambda local, got: None, busy=lambda local: True)
    with pytest.raises(RoundLimitExceeded):
        run_phase(w, handler)
    assert w.round == 10


def test_recv_on_reads_merged_sets():
    w = new_world(line_points(2))
    pm = w.singletons()
    pm[:, pin(Direction.E, 1)] = pm[:, pin(Direction.E, 0)]
    beep = np.zeros((w.n, PINS), dtype=bool)
    beep[1, pin(Direction.W, 0)] = True
    inbox = w.round_exchange(pm, beep)
    assert recv_on(inbox, pm, pin(Direction.E, 1))[0]


def test_audit_idle_is_small():
    w = new_world(line_points(8))
    assert audit_state_size(w) == 2
    w.set("x", np.zeros(w.n, dtype=bool))
    assert audit_state_size(w) < 16


def test_audit_flags_growing_state():
    w = new_world(line_points(8), state_limit=64, audit_interval=1)

    def send(local):
        return PinConfig(), []

    def receive(local, got):
        history = list(local["history"] or [])
        history.append([bool(x) for x in local.neighbors])
        local["history"] = history

    handler = ScalarHandler(send, receive)
    with pytest.raises(HandlerStateOverflow):
        for _ in range(50):
            step(w, handler)
    assert w.max_state_bytes > 64

"""Chains, distributed binary counters, PASC and PASC with cutoff.

A chain family (``ChainRef``) is a set of edge-disjoint straight chains on
one axis.  Chain membership, the chain start and whether a successor exists
are per-amoebot flags; predecessor and successor directions are fixed per
family.  Counters live on the maximal segments of all three axes at once,
one bit lane per axis, with bit 0 at the segment end opposite to the
axis's forward direction (E, NE or NW).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .runtime import PINS, World, pin
from .trigrid import Direction

LANES = (0, 1, 2)
LT, EQ, GT = 0, 1, 2
REL_SYMBOL = {LT: "<", EQ: "=", GT: ">"}


class Overflow(ArithmeticError):
    pass


class DivideByZero(ZeroDivisionError):
    pass


class InactiveCounter(RuntimeError):
    pass


@dataclass
class ChainRef:
    """Edge-disjoint chains on one axis, successors in ``succ_dir``."""

    succ_dir: Direction
    member: np.ndarray
    head: np.ndarray
    has_succ: np.ndarray

    @property
    def pred_dir(self) -> Direction:
        return self.succ_dir.opposite()

    @property
    def has_pred(self) -> np.ndarray:
        return self.member & ~self.head

    @property
    def last(self) -> np.ndarray:
        return self.member & ~self.has_succ

    def pins(self, lane: int) -> tuple[int, int]:
        """(predecessor-side pin, successor-side pin) on ``lane``."""
        return pin(self.pred_dir, lane), pin(self.succ_dir, lane)

    def chains(self, world: World) -> list[list]:
        """Observer tap: each chain as a list of positions from its start."""
        pts = world.structure.points
        idx = world.structure.index
        out = []
        for i in np.flatnonzero(self.head):
            cur = pts[i]
            seq = [cur]
            j = i
            while self.has_succ[j]:
                cur = cur + self.succ_dir.vec
                j = idx[cur]
                seq.append(cur)
            out.append(seq)
        return sorted(out)

    def index(self, world: World) -> np.ndarray:
        """Observer tap: position of each member in its chain, -1 elsewhere."""
        out = np.full(world.n, -1, dtype=np.int64)
        idx = world.structure.index
        for seq in self.chains(world):
            for i, p in enumerate(seq):
                out[idx[p]] = i
        return out


def segment_chains(world: World, succ_dir: Direction) -> ChainRef:
    """Maximal segments on the axis of ``succ_dir``, read from neighbor occupancy."""
    succ_dir = Direction(succ_dir)
    has = world.has
    member = np.ones(world.n, dtype=bool)
    return ChainRef(succ_dir, member, ~has[:, succ_dir.opposite()], has[:, succ_dir].copy())


def build_segments(world: World, d: Direction) -> ChainRef:
    """Chains along all maximal segments of the axis of ``d``, starting at the ``d`` end.

    One round: every amoebot beeps to both neighbors on the axis and learns
    from the received beeps which of them exist.
    """
    d = Direction(d)
    back = d.opposite()
    pm = world.singletons()
    beep = np.zeros((world.n, PINS), dtype=bool)
    beep[:, pin(d, 0)] = True
    beep[:, pin(back, 0)] = True
    inbox = world.round_exchange(pm, beep)
    toward_d = inbox[:, pin(d, 0)] & world.has[:, d]
    toward_back = inbox[:, pin(back, 0)] & world.has[:, back]
    member = np.ones(world.n, dtype=bool)
    return ChainRef(back, member, ~toward_d, toward_back)


class Round:
    """Accumulates one round's pin configuration and beeps."""

    def __init__(self, world: World):
        self.world = world
        self.pm = world.singletons()
        self.beep = np.zeros((world.n, PINS), dtype=bool)
        self.inbox: np.ndarray | None = None

    def merge(self, mask, *pins: int) -> "Round":
        rows = np.flatnonzero(mask)
        if len(rows):
            rep = self.pm[rows, pins[0]]
            for p in pins[1:]:
                self.pm[rows, p] = rep
        return self

    def send(self, mask, p: int) -> "Round":
        rows = np.flatnonzero(mask)
        if len(rows):
            self.beep[rows, self.pm[rows, p]] = True
        return self

    def global_lane(self, lane: int) -> "Round":
        """Put every pin of ``lane`` into one set everywhere."""
        self.pm[:, lane::2] = lane
        return self

    def chain_line(self, ref: ChainRef, lane: int, mask=None) -> "Round":
        """Connect predecessor and successor pins of ``lane`` along the chains."""
        p, s = ref.pins(lane)
        m = ref.has_pred & ref.has_succ
        if mask is not None:
            m = m & mask
        return self.merge(m, p, s)

    def run(self) -> "Round":
        self.inbox = self.world.round_exchange(self.pm, self.beep)
        return self

    def got(self, p: int) -> np.ndarray:
        assert self.inbox is not None
        return self.inbox[self.world.rows, self.pm[:, p]]


# ---------------------------------------------------------------------------
# counters


class Counters:
    """The counter chains of one world: maximal segments on all three axes."""

    def __init__(self, world: World):
        self.world = world
        self.refs = [segment_chains(world, Direction(a)) for a in LANES]

    @classmethod
    def establish(cls, world: World) -> "Counters":
        """One neighbor-handshake round, after which every amoebot knows its lanes."""
        existing = getattr(world, "_counters", None)
        if existing is not None:
            return existing
        pm = world.singletons()
        beep = np.ones((world.n, PINS), dtype=bool)
        world.round_exchange(pm, beep)
        c = cls(world)
        world._counters = c
        return c


def counters(world: World) -> Counters:
    c = getattr(world, "_counters", None)
    if c is None:
        c = Counters(world)
        world._counters = c
    return c


class Register:
    """A named counter value held on every segment lane."""

    def __init__(self, world: World, name: str):
        self.world = world
        self.name = name
        self.lanes = counters(world).refs

    def bit_name(self, a: int) -> str:
        return f"{self.name}.b{a}"

    def on_name(self, a: int) -> str:
        return f"{self.name}.on{a}"

    def bits(self, a: int) -> np.ndarray:
        return self.world.flag(self.bit_name(a))

    def on(self, a: int) -> np.ndarray:
        return self.world.flag(self.on_name(a))

    def put(self, a: int, bits, on) -> None:
        self.world.set(self.bit_name(a), bits)
        self.world.set(self.on_name(a), on)

    def drop(self) -> None:
        for a in LANES:
            self.world.drop(self.bit_name(a), self.on_name(a))

    def any_on(self) -> np.ndarray:
        return self.on(0) | self.on(1) | self.on(2)

    # observer taps -------------------------------------------------------

    def values(self) -> dict:
        """Observer tap: value per active counter, keyed by (lane, segment start)."""
        out = {}
        for a in LANES:
            ref = self.lanes[a]
            bits = self.bits(a)
            on = self.on(a)
            idx = self.world.structure.index
            for seq in ref.chains(self.world):
                if not on[idx[seq[0]]]:
                    continue
                v = 0
                for i, p in enumerate(seq):
                    if bits[idx[p]]:
                        v |= 1 << i
                out[(a, seq[0])] = v
        return out

    def read(self) -> int | None:
        """Observer tap: the value on the lexicographically smallest active segment start."""
        vals = self.values()
        if not vals:
            return None
        key = min(vals, key=lambda k: (tuple(k[1]), k[0]))
        return vals[key]

    def load(self, value: int) -> None:
        """Test setup tap: write ``value`` directly; segments too short become inactive."""
        idx = self.world.structure.index
        for a in LANES:
            bits = np.zeros(self.world.n, dtype=bool)
            on = np.zeros(self.world.n, dtype=bool)
            for seq in self.lanes[a].chains(self.world):
                fits = value < (1 << len(seq))
                for i, p in enumerate(seq):
                    bits[idx[p]] = bool((value >> i) & 1) and fits
                    on[idx[p]] = fits
            self.put(a, bits, on)


def register(world: World, name: str) -> Register:
    return Register(world, name)


def line_send(r: Round, ref: ChainRef, lane: int, flags) -> None:
    """Beep ``flags`` on a chain-wide line circuit configured with ``Round.chain_line``."""
    p, s = ref.pins(lane)
    flags = np.asarray(flags, dtype=bool)
    r.send(flags & ref.has_pred, p)
    r.send(flags & ref.head & ref.has_succ, s)


def line_heard(r: Round, ref: ChainRef, lane: int, flags) -> np.ndarray:
    p, s = ref.pins(lane)
    return (r.got(p) & ref.has_pred) | (ref.head & r.got(s)) | np.asarray(flags, dtype=bool)


def _segment_broadcast(world: World, flags0: Sequence, flags1: Sequence | None = None):
    """Each segment lane learns whether any member raised ``flags0`` (and ``flags1``)."""
    r = Round(world)
    lanes = counters(world).refs
    for a in LANES:
        r.chain_line(lanes[a], 0)
        line_send(r, lanes[a], 0, flags0[a])
        if flags1 is not None:
            r.chain_line(lanes[a], 1)
            line_send(r, lanes[a], 1, flags1[a])
    r.run()
    g0 = [line_heard(r, lanes[a], 0, flags0[a]) for a in LANES]
    if flags1 is None:
        return g0
    g1 = [line_heard(r, lanes[a], 1, flags1[a]) for a in LANES]
    return g0, g1


def copy_register(src: Register, dst: Register) -> Register:
    for a in LANES:
        dst.put(a, src.bits(a), src.on(a))
    return dst


def load_const(world: World, dst: Register, c: int) -> Register:
    """Write a program constant by walking a marker from each segment start."""
    if c < 0:
        raise ValueError("counters hold non-negative values")
    lanes = counters(world).refs
    bits = [np.zeros(world.n, dtype=bool) for _ in LANES]
    if c <= 1:
        for a in LANES:
            bits[a] = lanes[a].head & bool(c)
            dst.put(a, bits[a], np.ones(world.n, dtype=bool))
        return dst
    length = c.bit_length()
    mk = [lanes[a].head.copy() for a in LANES]
    ovf = [np.zeros(world.n, dtype=bool) for _ in LANES]
    for j in range(length):
        for a in LANES:
            bits[a] = bits[a] | (mk[a] & bool((c >> j) & 1))
        if j == length - 1:
            break
        r = Round(world)
        for a in LANES:
            p0, s0 = lanes[a].pins(0)
            r.send(mk[a] & lanes[a].has_succ, s0)
        r.run()
        for a in LANES:
            p0, _ = lanes[a].pins(0)
            ovf[a] = ovf[a] | (mk[a] & ~lanes[a].has_succ)
            mk[a] = r.got(p0) & lanes[a].has_pred
    bad = _segment_broadcast(world, ovf)
    for a in LANES:
        dst.put(a, bits[a] & ~bad[a], ~bad[a])
    return dst


def _add_round(world: World, a_bits, b_bits, subtract: bool, extra_lane1=None):
    """One carry/borrow propagation round on all lanes; returns (sum, carry-out at last)."""
    lanes = counters(world).refs
    r = Round(world)
    prop, gen = [], []
    for a in LANES:
        ref = lanes[a]
        x, y = a_bits[a], b_bits[a]
        if subtract:
            p_ = x == y
            g_ = ~x & y
        else:
            p_ = x ^ y
            g_ = x & y
        prop.append(p_)
        gen.append(g_)
        p0, s0 = ref.pins(0)
        r.merge(p_ & ref.has_pred & ref.has_succ, p0, s0)
        r.send(g_ & ref.has_succ, s0)
    if extra_lane1 is not None:
        extra_lane1(r)
    r.run()
    out, cout = [], []
    for a in LANES:
        ref = lanes[a]
        p0, _ = ref.pins(0)
        cin = r.got(p0) & ref.has_pred
        out.append(a_bits[a] ^ b_bits[a] ^ cin)
        cout.append((gen[a] | (prop[a] & cin)) & ref.last)
    return out, cout, r


def add(world: World, A: Register, B: Register, out: Register, subtract: bool = False) -> Register:
    """``out = A + B`` (or ``A - B``); overflow or a negative result deactivates ``out``."""
    a_bits = [A.bits(a) for a in LANES]
    b_bits = [B.bits(a) for a in LANES]
    on = [A.on(a) & B.on(a) for a in LANES]
    s, cout, _ = _add_round(world, a_bits, b_bits, subtract)
    bad = _segment_broadcast(world, cout)
    for a in LANES:
        out.put(a, s[a] & ~bad[a], on[a] & ~bad[a])
    return out


def sub(world: World, A: Register, B: Register, out: Register) -> Register:
    return add(world, A, B, out, subtract=True)


def double(world: World, A: Register, out: Register) -> Register:
    lanes = counters(world).refs
    r = Round(world)
    for a in LANES:
        _, s0 = lanes[a].pins(0)
        r.send(A.bits(a) & lanes[a].has_succ, s0)
    r.run()
    bits, ovf, on = [], [], []
    for a in LANES:
        p0, _ = lanes[a].pins(0)
        bits.append(r.got(p0) & lanes[a].has_pred)
        ovf.append(A.bits(a) & lanes[a].last)
        on.append(A.on(a))
    bad = _segment_broadcast(world, ovf)
    for a in LANES:
        out.put(a, bits[a] & ~bad[a], on[a] & ~bad[a])
    return out


def halve(world: World, A: Register, out: Register) -> Register:
    lanes = counters(world).refs
    r = Round(world)
    for a in LANES:
        p0, _ = lanes[a].pins(0)
        r.send(A.bits(a) & lanes[a].has_pred, p0)
    r.run()
    res = []
    for a in LANES:
        _, s0 = lanes[a].pins(0)
        res.append((r.got(s0) & lanes[a].has_succ, A.on(a)))
    for a in LANES:
        out.put(a, *res[a])
    return out


def _top_difference(r: Round, lanes, x_bits, y_bits, lane: int):
    """Configure a round in which the highest differing bit position learns it is highest."""
    for a in LANES:
        ref = lanes[a]
        p, s = ref.pins(lane)
        eq = x_bits[a] == y_bits[a]
        r.merge(eq & ref.has_pred & ref.has_succ, p, s)
        r.send(~eq & ref.has_pred, p)

    def read() -> list:
        out = []
        for a in LANES:
            ref = lanes[a]
            _, s = ref.pins(lane)
            eq = x_bits[a] == y_bits[a]
            out.append(~eq & ~(r.got(s) & ref.has_succ))
        return out

    return read


def compare(world: World, A: Register, B: Register) -> str:
    """Compare two registers held by all active counters; 2 rounds."""
    lanes = counters(world).refs
    x = [A.bits(a) for a in LANES]
    y = [B.bits(a) for a in LANES]
    r = Round(world)
    read = _top_difference(r, lanes, x, y, 0)
    r.run()
    top = read()
    gt = np.zeros(world.n, dtype=bool)
    lt = np.zeros(world.n, dtype=bool)
    for a in LANES:
        act = A.on(a) & B.on(a)
        gt |= act & top[a] & x[a] & ~y[a]
        lt |= act & top[a] & ~x[a] & y[a]
    g, l_ = world.global_or(gt, lt)
    if g and l_:
        raise RuntimeError("active counters disagree")
    return ">" if g else "<" if l_ else "="


def msb_marks(world: World, A: Register, lane: int = 0, r: Round | None = None):
    """Mark the most significant one bit (the chain start for value 0); 1 round."""
    lanes = counters(world).refs
    own = r is None
    if own:
        r = Round(world)
    bits = [A.bits(a) for a in LANES]
    for a in LANES:
        ref = lanes[a]
        p, s = ref.pins(lane)
        r.merge(~bits[a] & ref.has_pred & ref.has_succ, p, s)
        r.send(bits[a] & ref.has_pred, p)

    def read() -> list:
        out = []
        for a in LANES:
            ref = lanes[a]
            _, s = ref.pins(lane)
            above = r.got(s) & ref.has_succ
            out.append((bits[a] & ~above) | (ref.head & ~bits[a] & ~above))
        return out

    if own:
        r.run()
        return read()
    return read


def msb(world: World, A: Register) -> list:
    return msb_marks(world, A)


def mul(world: World, A: Register, B: Register, out: Register) -> Register:
    """Shift-and-add product; stops after the multiplicand's most significant bit."""
    lanes = counters(world).refs
    n = world.n
    a_bits = [A.bits(a) for a in LANES]
    act = [A.on(a) & B.on(a) for a in LANES]
    top = msb_marks(world, A)
    c = [np.zeros(n, dtype=bool) for _ in LANES]
    bp = [B.bits(a) for a in LANES]
    mk = [lanes[a].head.copy() for a in LANES]
    lost = [np.zeros(n, dtype=bool) for _ in LANES]
    ovf = [np.zeros(n, dtype=bool) for _ in LANES]
    fin = [np.zeros(n, dtype=bool) for _ in LANES]
    while True:
        addflag, done = _segment_broadcast(
            world, [mk[a] & a_bits[a] for a in LANES], [mk[a] & top[a] for a in LANES]
        )
        for a in LANES:
            fin[a] = fin[a] | done[a]
            ovf[a] = ovf[a] | (addflag[a] & lost[a] & lanes[a].last)
        operand = [bp[a] & addflag[a] for a in LANES]

        def vote(r: Round) -> None:
            r.global_lane(1)
            busy = np.zeros(n, dtype=bool)
            for a in LANES:
                busy |= act[a] & ~fin[a]
            r.send(busy, 1)

        c, cout, r = _add_round(world, c, operand, False, extra_lane1=vote)
        for a in LANES:
            ovf[a] = ovf[a] | cout[a]
        if not r.inbox[0, 1]:
            break
        r = Round(world)
        for a in LANES:
            ref = lanes[a]
            p0, s0 = ref.pins(0)
            p1, s1 = ref.pins(1)
            r.send(bp[a] & ref.has_succ, s0)
            r.send(mk[a] & ref.has_succ, s1)
        r.run()
        for a in LANES:
            ref = lanes[a]
            p0, _ = ref.pins(0)
            p1, _ = ref.pins(1)
            lost[a] = lost[a] | (bp[a] & ref.last)
            bp[a] = r.got(p0) & ref.has_pred
            mk[a] = r.got(p1) & ref.has_pred
    bad = _segment_broadcast(world, [ovf[a] & lanes[a].last for a in LANES])
    for a in LANES:
        out.put(a, c[a] & ~bad[a], act[a] & ~bad[a])
    return out


def divmod_registers(world: World, A: Register, B: Register, q_out: Register | None, r_out: Register | None):
    """Restoring division: align the divisor under the dividend's top bit, then subtract back down."""
    lanes = counters(world).refs
    n = world.n
    act = [A.on(a) & B.on(a) for a in LANES]
    a_bits = [A.bits(a) for a in LANES]
    b_bits = [B.bits(a) for a in LANES]

    r = Round(world)
    read_a = msb_marks(world, A, 0, r)
    read_b = msb_marks(world, B, 1, r)
    r.run()
    ma, mb = read_a(), read_b()

    zero = np.zeros(n, dtype=bool)
    for a in LANES:
        zero |= act[a] & mb[a] & lanes[a].head & ~b_bits[a]
    if world.global_or(zero):
        raise DivideByZero("division by a zero counter")

    # does the divisor have a one bit strictly above the dividend's top bit
    r = Round(world)
    for a in LANES:
        ref = lanes[a]
        p0, s0 = ref.pins(0)
        r.merge(~b_bits[a] & ~ma[a] & ref.has_pred & ref.has_succ, p0, s0)
        r.send(b_bits[a] & ref.has_pred, p0)
    r.run()
    above = [ma[a] & r.got(lanes[a].pins(0)[1]) & lanes[a].has_succ for a in LANES]
    toobig = _segment_broadcast(world, above)
    live = [act[a] & ~toobig[a] for a in LANES]

    rem = [a_bits[a].copy() for a in LANES]
    bp = [b_bits[a].copy() for a in LANES]
    pos = [lanes[a].head.copy() for a in LANES]
    q = [np.zeros(n, dtype=bool) for _ in LANES]

    while True:
        r = Round(world)
        r.global_lane(0)
        unaligned = [live[a] & ma[a] & ~bp[a] for a in LANES]
        r.send(unaligned[0] | unaligned[1] | unaligned[2], 0)
        for a in LANES:
            r.chain_line(lanes[a], 1)
            line_send(r, lanes[a], 1, unaligned[a])
        r.run()
        if not r.inbox[0, 0]:
            break
        shifting = [line_heard(r, lanes[a], 1, unaligned[a]) for a in LANES]
        r = Round(world)
        for a in LANES:
            ref = lanes[a]
            _, s0 = ref.pins(0)
            _, s1 = ref.pins(1)
            r.send(shifting[a] & bp[a] & ref.has_succ, s0)
            r.send(shifting[a] & pos[a] & ref.has_succ, s1)
        r.run()
        for a in LANES:
            ref = lanes[a]
            p0, _ = ref.pins(0)
            p1, _ = ref.pins(1)
            bp[a] = np.where(shifting[a], r.got(p0) & ref.has_pred, bp[a])
            pos[a] = np.where(shifting[a], r.got(p1) & ref.has_pred, pos[a])

    done = [~live[a] for a in LANES]
    while True:
        r = Round(world)
        read_top = _top_difference(r, lanes, rem, bp, 0)
        r.global_lane(1)
        busy = np.zeros(n, dtype=bool)
        for a in LANES:
            busy |= live[a] & ~done[a]
        r.send(busy, 1)
        r.run()
        if not r.inbox[0, 1]:
            break
        top = read_top()
        gt, lt = _segment_broadcast(
            world,
            [top[a] & rem[a] & ~bp[a] for a in LANES],
            [top[a] & ~rem[a] & bp[a] for a in LANES],
        )
        ge = [~lt[a] & ~done[a] for a in LANES]
        del gt

        at_start = [pos[a] & lanes[a].head & ~done[a] for a in LANES]

        def last_iteration(r: Round) -> None:
            for a in LANES:
                r.chain_line(lanes[a], 1)
                line_send(r, lanes[a], 1, at_start[a])

        operand = [bp[a] & ge[a] for a in LANES]
        new_rem, _, r = _add_round(world, rem, operand, True, extra_lane1=last_iteration)
        final = []
        for a in LANES:
            final.append(line_heard(r, lanes[a], 1, at_start[a]) & ~done[a])
            q[a] = q[a] | (pos[a] & ge[a])
            rem[a] = np.where(done[a], rem[a], new_rem[a])
        r = Round(world)
        moving = [~done[a] & ~final[a] for a in LANES]
        for a in LANES:
            ref = lanes[a]
            p0, _ = ref.pins(0)
            p1, _ = ref.pins(1)
            r.send(moving[a] & bp[a] & ref.has_pred, p0)
            r.send(moving[a] & pos[a] & ref.has_pred, p1)
        r.run()
        for a in LANES:
            ref = lanes[a]
            _, s0 = ref.pins(0)
            _, s1 = ref.pins(1)
            bp[a] = np.where(moving[a], r.got(s0) & ref.has_succ, bp[a])
            pos[a] = np.where(moving[a], r.got(s1) & ref.has_succ, pos[a])
            done[a] = done[a] | final[a]

    for a in LANES:
        if q_out is not None:
            q_out.put(a, q[a] & act[a], act[a])
        if r_out is not None:
            r_out.put(a, rem[a] & act[a], act[a])
    return q_out, r_out


def div(world: World, A: Register, B: Register, out: Register) -> Register:
    return divmod_registers(world, A, B, out, None)[0]


def mod(world: World, A: Register, B: Register, out: Register) -> Register:
    return divmod_registers(world, A, B, None, out)[1]


def mul_const(world: World, A: Register, c: int, out: Register) -> Register:
    """``out = A * c`` for a program constant ``c`` by doubling and adding."""
    if c < 0:
        raise ValueError("constant must be non-negative")
    if c == 0:
        return load_const(world, out, 0)
    if c == 1:
        return copy_register(A, out)
    tmp = Register(world, out.name + "~x")
    acc = Register(world, out.name + "~a")
    copy_register(A, tmp)
    started = False
    bits = c.bit_length()
    for j in range(bits):
        if (c >> j) & 1:
            if started:
                add(world, acc, tmp, acc)
            else:
                copy_register(tmp, acc)
                started = True
        if j < bits - 1:
            double(world, tmp, tmp)
    copy_register(acc, out)
    tmp.drop()
    acc.drop()
    return out


def add_const(world: World, A: Register, c: int, out: Register, subtract: bool = False) -> Register:
    tmp = Register(world, out.name + "~c")
    load_const(world, tmp, c)
    add(world, A, tmp, out, subtract=subtract)
    tmp.drop()
    return out


def is_zero(world: World, A: Register) -> bool:
    """Global test whether the active counters hold 0; 2 rounds."""
    lanes = counters(world).refs
    top = msb_marks(world, A)
    flag = np.zeros(world.n, dtype=bool)
    for a in LANES:
        flag |= A.on(a) & top[a] & lanes[a].head & ~A.bits(a)
    return world.global_or(flag)


def any_active(world: World, A: Register) -> bool:
    return world.global_or(A.any_on())


COUNTER_OPS = {
    "add": lambda w, A, B, O: add(w, A, B, O),
    "sub": lambda w, A, B, O: sub(w, A, B, O),
    "double": lambda w, A, B, O: double(w, A, O),
    "halve": lambda w, A, B, O: halve(w, A, O),
    "mul": lambda w, A, B, O: mul(w, A, B, O),
    "div": lambda w, A, B, O: div(w, A, B, O),
    "mod": lambda w, A, B, O: mod(w, A, B, O),
}


def counter_arith(world: World, op: str, A: Register, B: Register | None = None, out: Register | None = None):
    """Dispatch one counter operation; ``compare`` returns '<', '=' or '>'."""
    if op == "compare":
        assert B is not None
        return compare(world, A, B)
    if op not in COUNTER_OPS:
        raise ValueError(f"unknown counter operation {op!r}")
    if out is None:
        out = Register(world, f"{op}.out")
    return COUNTER_OPS[op](world, A, B, out)


# ---------------------------------------------------------------------------
# bit streams


class StreamAdder:
    """LSB-first addition or subtraction of two synchronized bit streams."""

    def __init__(self, subtract: bool = False):
        self.subtract = subtract
        self.carry = 0

    def push(self, a: int, b: int) -> int:
        if self.subtract:
            c = a ^ b ^ self.carry
            self.carry = int((not a and b) or (not (a ^ b) and self.carry))
            return c
        c = a ^ b ^ self.carry
        self.carry = int((a and b) or ((a ^ b) and self.carry))
        return c

    @property
    def borrow_out(self) -> bool:
        return self.subtract and bool(self.carry)


class StreamComparator:
    """LSB-first comparison; the relation is final after the last bit pair."""

    def __init__(self):
        self.rel = "="

    def push(self, a: int, b: int) -> str:
        if a > b:
            self.rel = ">"
        elif a < b:
            self.rel = "<"
        return self.rel


def stream_arith(op: str, a_bits: Sequence[int], b_bits: Sequence[int]):
    """Run a stream operation over two equally long bit streams."""
    if len(a_bits) != len(b_bits):
        raise ValueError("streams must be synchronized")
    if op == "compare":
        cmp = StreamComparator()
        for x, y in zip(a_bits, b_bits):
            cmp.push(x, y)
        return cmp.rel
    if op not in ("add", "sub"):
        raise ValueError(f"unknown stream operation {op!r}")
    adder = StreamAdder(op == "sub")
    out = [adder.push(x, y) for x, y in zip(a_bits, b_bits)]
    if op == "add":
        out.append(adder.carry)
        return out
    return out, adder.borrow_out


# ---------------------------------------------------------------------------
# PASC


def _pasc_round(world: World, refs: Sequence[ChainRef], active: list) -> list:
    r = Round(world)
    for ref, act in zip(refs, active):
        p0, s0 = ref.pins(0)
        p1, s1 = ref.pins(1)
        r.send(ref.head & ref.has_succ, s0)
        inner = ref.has_pred & ref.has_succ
        r.merge(inner & act, p0, s1)
        r.merge(inner & act, p1, s0)
        r.merge(inner & ~act, p0, s0)
        r.merge(inner & ~act, p1, s1)
    r.run()
    bits = []
    for i, (ref, act) in enumerate(zip(refs, active)):
        p0, _ = ref.pins(0)
        p1, _ = ref.pins(1)
        odd = r.got(p1) & ref.has_pred
        bit = (odd ^ act) & ref.has_pred
        active[i] = act & ~bit
        bits.append(bit)
    return bits


def pasc(world: World, refs: Sequence[ChainRef], on_bits: Callable[[int, list], None] | None = None) -> int:
    """Run PASC on edge-disjoint chain families; returns the number of iterations.

    In iteration ``j`` every chain member with index ``i`` receives bit ``j``
    of ``i``; ``on_bits(j, bits)`` is an observer tap receiving those bits.
    A global check precedes each iteration.
    """
    refs = list(refs)
    active = [ref.has_pred.copy() for ref in refs]
    j = 0
    while True:
        busy = np.zeros(world.n, dtype=bool)
        for act in active:
            busy |= act
        if not world.global_or(busy):
            return j
        bits = _pasc_round(world, refs, active)
        if on_bits is not None:
            on_bits(j, bits)
        j += 1


def pasc_streams(world: World, refs: Sequence[ChainRef]) -> tuple[list[dict], int]:
    """Observer helper: per family, position -> LSB-first bit list."""
    streams = [dict() for _ in refs]
    pts = world.structure.points

    def tap(j: int, bits: list) -> None:
        for fam, (ref, b) in enumerate(zip(refs, bits)):
            for i in np.flatnonzero(ref.member):
                streams[fam].setdefault(pts[i], []).append(int(b[i]))

    iters = pasc(world, refs, tap)
    for fam, ref in enumerate(refs):
        for i in np.flatnonzero(ref.member):
            streams[fam].setdefault(pts[i], [])
    return streams, iters


def pasc_compare(world: World, refs: Sequence[ChainRef], d: Register) -> list[np.ndarray] | None:
    """Every chain member compares its index with the counter value ``d``.

    Returns per family an array of LT/EQ/GT (meaningful on members), or
    None when ``d`` has no active counter.
    """
    refs = list(refs)
    lanes = counters(world).refs
    n = world.n
    d_bits = [d.bits(a) for a in LANES]
    d_on = [d.on(a) for a in LANES]
    top = msb_marks(world, d)
    zero = np.zeros(n, dtype=bool)
    anyon = np.zeros(n, dtype=bool)
    for a in LANES:
        zero |= d_on[a] & top[a] & lanes[a].head & ~d_bits[a]
        anyon |= d_on[a]
    d_zero, has_value = world.global_or(zero, anyon)
    if not has_value:
        return None
    if d_zero:
        return [np.where(ref.head, EQ, GT).astype(np.int64) for ref in refs]

    rel = [np.full(n, EQ, dtype=np.int64) for _ in refs]
    active = [ref.has_pred.copy() for ref in refs]
    mk = [lanes[a].head.copy() for a in LANES]
    passed = [np.zeros(n, dtype=bool) for _ in LANES]
    while True:
        ibits = _pasc_round(world, refs, active)

        r = Round(world)
        r.global_lane(0)
        dflag = np.zeros(n, dtype=bool)
        for a in LANES:
            dflag |= d_on[a] & mk[a] & d_bits[a]
            _, s1 = lanes[a].pins(1)
            r.send(mk[a] & lanes[a].has_succ, s1)
        r.send(dflag, 0)
        r.run()
        dbit = bool(r.inbox[0, 0])
        for a in LANES:
            p1, _ = lanes[a].pins(1)
            passed[a] = passed[a] | (mk[a] & top[a])
            mk[a] = r.got(p1) & lanes[a].has_pred
        for i, ref in enumerate(refs):
            b = ibits[i]
            if dbit:
                rel[i] = np.where(ref.member & ~b, LT, rel[i])
            else:
                rel[i] = np.where(ref.member & b, GT, rel[i])

        busy = np.zeros(n, dtype=bool)
        for act in active:
            busy |= act
        unfinished = np.zeros(n, dtype=bool)
        for a in LANES:
            unfinished |= d_on[a] & top[a] & ~passed[a]
        chain_busy, d_busy = world.global_or(busy, unfinished)
        if chain_busy and d_busy:
            continue
        if d_busy:
            return [np.where(ref.member, LT, rel[i]) for i, ref in enumerate(refs)]
        if not chain_busy:
            return rel
        r = Round(world)
        for i, ref in enumerate(refs):
            p0, s0 = ref.pins(0)
            r.merge(ref.has_pred & ref.has_succ & (rel[i] != EQ), p0, s0)
            r.send(ref.head & ref.has_succ, s0)
        r.run()
        out = []
        for i, ref in enumerate(refs):
            p0, _ = ref.pins(0)
            heard = r.got(p0) & ref.has_pred
            res = np.where(heard, np.where(rel[i] == EQ, EQ, LT), GT)
            out.append(np.where(ref.head, rel[i], res))
        return out


__all__ = [
    "ChainRef",
    "Counters",
    "DivideByZero",
    "EQ",
    "GT",
    "InactiveCounter",
    "LANES",
    "LT",
    "Overflow",
    "REL_SYMBOL",
    "Register",
    "Round",
    "StreamAdder",
    "StreamComparator",
    "add",
    "add_const",
    "any_active",
    "build_segments",
    "compare",
    "copy_register",
    "counter_arith",
    "counters",
    "div",
    "divmod_registers",
    "double",
    "halve",
    "is_zero",
    "line_heard",
    "line_send",
    "load_const",
    "mod",
    "msb",
    "msb_marks",
    "mul",
    "mul_const",
    "pasc",
    "pasc_compare",
    "pasc_streams",
    "register",
    "segment_chains",
    "stream_arith",
    "sub",
]

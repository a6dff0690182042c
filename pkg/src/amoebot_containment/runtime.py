"""Synchronous amoebot world with reconfigurable circuits.

Every amoebot has two pins per incident edge, labeled ``(direction, lane)``
with lane 0 or 1.  Pin ``(d, lane)`` of ``u`` is linked to pin
``(opposite(d), lane)`` of the neighbor in direction ``d``.  A pin
configuration is stored as a row of 12 small integers mapping each pin to
the index of its partition set; sets are named by a representative pin.

Per-amoebot state lives in named integer fields, one array entry per
amoebot.  Transitions are written elementwise over those arrays, so every
amoebot runs the same local rule on its own state, its neighbor-occupancy
bits and the beep flags of its own partition sets.  The host driving a
procedure branches only on the round counter, program constants and the
outcome of global-circuit beeps, which every amoebot receives identically.
Hosts may additionally read fields as observer taps for reports and tests.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Protocol, Sequence

import numpy as np

from .trigrid import DIRECTIONS, UNIT, Direction, GridPoint

PINS = 12
DEFAULT_ROUND_CAP = 10**6
DEFAULT_STATE_LIMIT = 1024


def pin(d: int, lane: int) -> int:
    return int(d) * 2 + lane


class StructureError(ValueError):
    pass


class Disconnected(StructureError):
    def __init__(self, a: GridPoint, b: GridPoint):
        self.pair = (a, b)
        super().__init__(f"structure is disconnected: no path between {tuple(a)} and {tuple(b)}")


class DuplicatePoint(StructureError):
    def __init__(self, p: GridPoint):
        self.point = p
        super().__init__(f"point {tuple(p)} occurs more than once")


class HandlerStateOverflow(RuntimeError):
    pass


class RoundLimitExceeded(RuntimeError):
    pass


class AmoebotStructure:
    """A finite connected set of occupied grid nodes."""

    def __init__(self, points: Sequence[GridPoint]):
        self.points: tuple[GridPoint, ...] = tuple(sorted(points))
        self.index = {p: i for i, p in enumerate(self.points)}
        n = len(self.points)
        self.nbr = np.full((n, 6), -1, dtype=np.int64)
        for i, p in enumerate(self.points):
            for d in DIRECTIONS:
                j = self.index.get(p + UNIT[d])
                if j is not None:
                    self.nbr[i, d] = j
        self.has = self.nbr >= 0

    def __len__(self) -> int:
        return len(self.points)

    def __contains__(self, p) -> bool:
        return p in self.index

    @property
    def occupied(self) -> frozenset:
        return frozenset(self.points)


def circuit_labels(total: int, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Component label per partition set, given the links ``a[i] -- b[i]``.

    Min-label hooking with pointer jumping.  Labels only decrease and always
    name a member of the same component, so the loop ends with one label per
    component.
    """
    lab = np.arange(total)
    if len(a) == 0:
        return lab
    while True:
        la = lab[a]
        lb = lab[b]
        if np.array_equal(la, lb):
            break
        m = np.minimum(la, lb)
        np.minimum.at(lab, la, m)
        np.minimum.at(lab, lb, m)
        lab = lab[lab]
        lab = lab[lab]
    while True:
        nxt = lab[lab]
        if np.array_equal(nxt, lab):
            return lab
        lab = nxt


def load_structure(points: Iterable) -> AmoebotStructure:
    pts: list[GridPoint] = []
    seen: set[GridPoint] = set()
    for p in points:
        g = GridPoint(int(p[0]), int(p[1]))
        if g in seen:
            raise DuplicatePoint(g)
        seen.add(g)
        pts.append(g)
    if not pts:
        raise StructureError("structure must be non-empty")
    start = min(pts)
    reach = {start}
    stack = [start]
    while stack:
        p = stack.pop()
        for d in DIRECTIONS:
            q = p + UNIT[d]
            if q in seen and q not in reach:
                reach.add(q)
                stack.append(q)
    if len(reach) != len(pts):
        other = min(seen - reach)
        raise Disconnected(start, other)
    return AmoebotStructure(pts)


def parse_structure_text(text: str) -> AmoebotStructure:
    pts = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise StructureError(f"line {lineno}: expected 'x y', got {raw!r}")
        try:
            pts.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise StructureError(f"line {lineno}: coordinates must be integers") from None
    return load_structure(pts)


def format_structure_text(points: Iterable, header: str | None = None) -> str:
    out = []
    if header:
        out.extend(f"# {h}" for h in header.splitlines())
    out.extend(f"{p[0]} {p[1]}" for p in sorted(GridPoint(*p) for p in points))
    return "\n".join(out) + "\n"


class RoundHandler(Protocol):
    """One synchronous round: choose pins and beeps, then react to received beeps."""

    def send(self, world: "World") -> tuple[np.ndarray, np.ndarray]:
        """Return the ``(n, 12)`` pin-to-set map and the ``(n, 12)`` beep flags per set."""
        ...

    def receive(self, world: "World", inbox: np.ndarray) -> None:
        ...


@dataclass
class TraceRecord:
    round: int
    circuits: int
    beeping: int


@dataclass
class World:
    structure: AmoebotStructure
    round_cap: int = DEFAULT_ROUND_CAP
    state_limit: int = DEFAULT_STATE_LIMIT
    audit_interval: int = 32
    trace_enabled: bool = False
    fields: dict = field(default_factory=dict)
    round: int = 0
    trace: list = field(default_factory=list)
    max_state_bytes: int = 0

    def __post_init__(self) -> None:
        s = self.structure
        self.n = len(s)
        self.has = s.has
        self.rows = np.arange(self.n)
        la, lb = [], []
        for i in range(self.n):
            for d in range(6):
                j = s.nbr[i, d]
                if j > i:
                    for lane in (0, 1):
                        la.append(i * PINS + pin(d, lane))
                        lb.append(j * PINS + pin((d + 3) % 6, lane))
        self._la = np.asarray(la, dtype=np.int64)
        self._lb = np.asarray(lb, dtype=np.int64)
        self._base = (self.rows * PINS)[:, None]

    # state fields -------------------------------------------------------

    def get(self, name: str, default: int = 0) -> np.ndarray:
        arr = self.fields.get(name)
        if arr is None:
            arr = np.full(self.n, default, dtype=np.int64)
            self.fields[name] = arr
        return arr

    def set(self, name: str, values) -> None:
        arr = np.asarray(values)
        if arr.dtype == bool:
            arr = arr.astype(np.int64)
        if arr.shape == ():
            arr = np.full(self.n, int(arr), dtype=np.int64)
        self.fields[name] = arr

    def flag(self, name: str) -> np.ndarray:
        return self.get(name).astype(bool)

    def drop(self, *names: str) -> None:
        for name in names:
            self.fields.pop(name, None)

    def observe(self, name: str) -> dict:
        """Observer tap: per-position value of a field."""
        arr = self.get(name)
        return {p: arr[i].item() if hasattr(arr[i], "item") else arr[i] for i, p in enumerate(self.structure.points)}

    def positions(self, mask) -> set[GridPoint]:
        pts = self.structure.points
        return {pts[i] for i in np.flatnonzero(np.asarray(mask))}

    # rounds ---------------------------------------------------------------

    def singletons(self) -> np.ndarray:
        return np.tile(np.arange(PINS, dtype=np.int64), (self.n, 1))

    def round_exchange(self, pinmap: np.ndarray, beep: np.ndarray) -> np.ndarray:
        """Run one round with the given pin configurations and beeps; return the inbox."""
        if self.round >= self.round_cap:
            raise RoundLimitExceeded(f"round cap {self.round_cap} reached")
        gid = (self._base + pinmap).ravel()
        a = gid[self._la]
        b = gid[self._lb]
        labels = circuit_labels(self.n * PINS, a, b)
        flat_beep = np.asarray(beep, dtype=bool).ravel()
        hit = np.zeros(labels.max() + 1, dtype=bool)
        hit[labels[np.flatnonzero(flat_beep)]] = True
        inbox = hit[labels].reshape(self.n, PINS)
        if self.trace_enabled:
            comps = np.unique(labels[np.unique(gid)])
            self._finish_round(len(comps), int(hit[comps].sum()))
        else:
            self._finish_round(0, 0)
        return inbox

    def _finish_round(self, circuits: int, beeping: int) -> None:
        self.round += 1
        if self.trace_enabled:
            self.trace.append(TraceRecord(self.round, circuits, beeping))
        if self.audit_interval and self.round % self.audit_interval == 0:
            self.audit()

    def audit(self) -> int:
        size = audit_state_size(self)
        self.max_state_bytes = max(self.max_state_bytes, size)
        if size > self.state_limit:
            raise HandlerStateOverflow(f"amoebot state of {size} bytes exceeds limit {self.state_limit}")
        return size

    # global circuits ------------------------------------------------------

    def global_pins(self) -> np.ndarray:
        """Lane-0 pins form one global circuit and lane-1 pins a second one."""
        row = np.array([p % 2 for p in range(PINS)], dtype=np.int64)
        return np.tile(row, (self.n, 1))

    def global_or(self, flags, flags1=None):
        """Beep on the global circuit(s); every amoebot learns the disjunction."""
        # the structure is connected, so each lane's pins form exactly one circuit
        if self.round >= self.round_cap:
            raise RoundLimitExceeded(f"round cap {self.round_cap} reached")
        b0 = bool(np.any(flags))
        b1 = bool(np.any(flags1)) if flags1 is not None else False
        self._finish_round(2, int(b0) + int(b1))
        if flags1 is None:
            return b0
        return b0, b1


def recv_on(inbox: np.ndarray, pinmap: np.ndarray, p: int) -> np.ndarray:
    """Per amoebot: did the partition set holding pin ``p`` receive a beep."""
    return inbox[np.arange(len(pinmap)), pinmap[:, p]]


def merge(pinmap: np.ndarray, mask: np.ndarray, pins: Sequence[int]) -> None:
    """Where ``mask`` holds, put ``pins`` into the set of the first pin."""
    if not len(pins):
        return
    rows = np.flatnonzero(mask)
    if len(rows) == 0:
        return
    rep = pinmap[rows, pins[0]]
    for p in pins[1:]:
        pinmap[rows, p] = rep


def set_beep(beep: np.ndarray, pinmap: np.ndarray, mask: np.ndarray, p: int) -> None:
    """Where ``mask`` holds, beep on the set containing pin ``p``."""
    rows = np.flatnonzero(mask)
    beep[rows, pinmap[rows, p]] = True


def step(world: World, handler: RoundHandler) -> World:
    pinmap, beep = handler.send(world)
    inbox = world.round_exchange(pinmap, beep)
    handler.receive(world, inbox)
    return world


def run_phase(world: World, handler, until: Callable[[World], np.ndarray] | None = None) -> tuple[World, int]:
    """Alternate handler rounds with a quiet-check on the global circuit.

    ``until`` (or ``handler.busy``) returns per-amoebot flags; amoebots that
    are still busy beep on the global circuit and the phase ends on the
    first silent check.
    """
    busy = until if until is not None else handler.busy
    start = world.round
    while True:
        step(world, handler)
        if not world.global_or(busy(world)):
            return world, world.round - start


def audit_state_size(world: World) -> int:
    """Largest serialized per-amoebot state, in bytes."""
    if not world.fields:
        return 2
    names = sorted(world.fields)
    sizes = np.full(world.n, 2 + max(len(names) - 1, 0), dtype=np.int64)
    for name in names:
        arr = world.fields[name]
        sizes += len(json.dumps(name)) + 1
        if arr.dtype == object:
            sizes += np.array([len(json.dumps(v, default=str)) for v in arr], dtype=np.int64)
        else:
            v = np.abs(arr.astype(np.int64))
            digits = np.ones(world.n, dtype=np.int64)
            big = v >= 10
            while big.any():
                digits += big
                v = v // 10
                big = v >= 10
            sizes += digits + (arr < 0)
    return int(sizes.max())


class Local:
    """Scalar view of one amoebot for per-amoebot handlers."""

    __slots__ = ("world", "i")

    def __init__(self, world: World, i: int):
        self.world = world
        self.i = i

    @property
    def neighbors(self) -> tuple[bool, ...]:
        return tuple(bool(x) for x in self.world.has[self.i])

    @property
    def phase(self) -> int:
        return self.world.round

    def __getitem__(self, name: str):
        arr = self.world.fields.get(name)
        return None if arr is None else arr[self.i]

    def __setitem__(self, name: str, value) -> None:
        arr = self.world.fields.get(name)
        if arr is None:
            if isinstance(value, (int, bool, np.integer)):
                arr = np.zeros(self.world.n, dtype=np.int64)
            else:
                arr = np.empty(self.world.n, dtype=object)
            self.world.fields[name] = arr
        arr[self.i] = value


class PinConfig:
    """An explicit partition of the 12 pins; unlisted pins stay singletons."""

    def __init__(self, sets: Iterable[Iterable[int]] = ()):
        self.sets = [tuple(s) for s in sets]
        row = list(range(PINS))
        listed: set[int] = set()
        for s in self.sets:
            if not s:
                raise ValueError("empty partition set")
            for p in s:
                if p in listed:
                    raise ValueError(f"pin {p} listed twice")
                listed.add(p)
                row[p] = s[0]
        self.row = np.asarray(row, dtype=np.int64)

    @staticmethod
    def all_in_one() -> "PinConfig":
        return PinConfig([range(PINS)])

    def set_of(self, p: int) -> int:
        return int(self.row[p])


class ScalarHandler:
    """Adapter running a per-amoebot transition function on every amoebot."""

    def __init__(self, send: Callable, receive: Callable, busy: Callable | None = None):
        self._send = send
        self._receive = receive
        self._busy = busy
        self._configs: list[PinConfig] = []

    def send(self, world: World):
        pm = world.singletons()
        beep = np.zeros((world.n, PINS), dtype=bool)
        self._configs = []
        for i in range(world.n):
            cfg, beeps = self._send(Local(world, i))
            self._configs.append(cfg)
            pm[i] = cfg.row
            for p in beeps:
                beep[i, cfg.set_of(p)] = True
        return pm, beep

    def receive(self, world: World, inbox: np.ndarray) -> None:
        for i in range(world.n):
            cfg = self._configs[i]
            got = {p: bool(inbox[i, cfg.row[p]]) for p in range(PINS)}
            self._receive(Local(world, i), got)

    def busy(self, world: World) -> np.ndarray:
        if self._busy is None:
            return np.zeros(world.n, dtype=bool)
        return np.array([bool(self._busy(Local(world, i))) for i in range(world.n)])


def new_world(points_or_structure, **kw) -> World:
    s = points_or_structure
    if not isinstance(s, AmoebotStructure):
        s = load_structure(s)
    return World(s, **kw)


__all__ = [
    "AmoebotStructure",
    "Direction",
    "Disconnected",
    "DuplicatePoint",
    "HandlerStateOverflow",
    "Local",
    "PINS",
    "PinConfig",
    "RoundHandler",
    "RoundLimitExceeded",
    "ScalarHandler",
    "StructureError",
    "World",
    "audit_state_size",
    "format_structure_text",
    "load_structure",
    "merge",
    "new_world",
    "parse_structure_text",
    "pin",
    "recv_on",
    "run_phase",
    "set_beep",
    "step",
]

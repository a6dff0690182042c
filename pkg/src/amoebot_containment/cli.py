"""Command line front end: solve, generate, render, bench and check-shape."""

from __future__ import annotations

import argparse
import hashlib
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import oracle
from .chain_ops import Counters
from .placement_prims import solve_unit_line
from .runtime import (
    DEFAULT_ROUND_CAP,
    RoundLimitExceeded,
    StructureError,
    format_structure_text,
    new_world,
    parse_structure_text,
)
from .shapes import (
    TreeError,
    axis_width,
    eval_tree,
    is_r_symmetric,
    is_star_convex,
    parse_snowflake,
    scale,
    serialize_snowflake,
    star_convex_decompose,
    translate_shape,
    tri,
)
from .solver import TrivialShape, solve
from .trigrid import UNIT, Axis, Direction, GridPoint, embed

REPORT_MAGIC = "amoebot-containment-report"
REPORT_VERSION = 1
EXIT_INPUT = 2
EXIT_MISMATCH = 3
EXIT_ROUND_CAP = 4
PX = 40.0
ROTATION_STYLES = (
    ("#d62728", ""),
    ("#1f77b4", "4,2"),
    ("#2ca02c", "1,2"),
    ("#9467bd", "6,2,1,2"),
    ("#ff7f0e", "8,3"),
    ("#17becf", "2,4"),
)


class InputError(ValueError):
    pass


# ---------------------------------------------------------------------------
# reports


@dataclass
class RunReport:
    structure: str
    tree: str
    seed: int | None
    input_hash: str
    k_max: int
    rounds_used: int
    strategy: str
    search_trace: list[tuple[int, bool]] = field(default_factory=list)
    placements: dict[int, list[GridPoint]] = field(default_factory=dict)
    check: str = "skipped"
    wall_time: float = 0.0

    def to_text(self) -> str:
        lines = [
            f"{REPORT_MAGIC} {REPORT_VERSION}",
            f"input-hash {self.input_hash}",
            f"structure {self.structure}",
            f"tree {self.tree}",
            f"seed {'-' if self.seed is None else self.seed}",
            f"k-max {self.k_max}",
            f"scale-zero {'yes' if self.k_max == 0 else 'no'}",
            f"rounds-used {self.rounds_used}",
            f"strategy {self.strategy}",
            "trace " + " ".join(f"{k}:{'y' if f else 'n'}" for k, f in self.search_trace),
        ]
        for r in range(6):
            pts = sorted(self.placements.get(r, []))
            lines.append(f"placements r{r} " + " ".join(f"{p.x},{p.y}" for p in pts))
        lines.append(f"check {self.check}")
        lines.append(f"wall-time {self.wall_time:.6f}")
        return "\n".join(line.rstrip() for line in lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunReport":
        rows = text.splitlines()
        if not rows or rows[0].split() != [REPORT_MAGIC, str(REPORT_VERSION)]:
            raise InputError("not a version 1 report")
        kv: dict[str, str] = {}
        placements: dict[int, list[GridPoint]] = {}
        for row in rows[1:]:
            key, _, rest = row.partition(" ")
            if key == "placements":
                tag, _, pts = rest.partition(" ")
                placements[int(tag[1:])] = [
                    GridPoint(*map(int, tok.split(","))) for tok in pts.split()
                ]
            else:
                kv[key] = rest
        trace = []
        for tok in kv.get("trace", "").split():
            k, f = tok.split(":")
            trace.append((int(k), f == "y"))
        seed = kv.get("seed", "-")
        return cls(
            structure=kv["structure"],
            tree=kv["tree"],
            seed=None if seed == "-" else int(seed),
            input_hash=kv["input-hash"],
            k_max=int(kv["k-max"]),
            rounds_used=int(kv["rounds-used"]),
            strategy=kv.get("strategy", ""),
            search_trace=trace,
            placements=placements,
            check=kv.get("check", "skipped"),
            wall_time=float(kv.get("wall-time", "0")),
        )


def input_hash(points, tree_text: str, seed) -> str:
    h = hashlib.sha256()
    h.update(format_structure_text(points).encode())
    h.update(b"\0" + tree_text.encode())
    h.update(b"\0" + str(seed).encode())
    return "sha256:" + h.hexdigest()


def check_report(report: RunReport, points, shape) -> bool:
    """Compare a report's scale and placements with the brute-force oracle."""
    occ = frozenset(GridPoint(p[0], p[1]) for p in points)
    k = oracle.oracle_kmax(occ, shape)
    if report.k_max != k:
        return False
    for r in range(6):
        got = set(report.placements.get(r, []))
        if len(got) != len(report.placements.get(r, [])):
            return False
        want = oracle.oracle_placements(occ, shape, k, r) if k else set()
        if got != want:
            return False
    return True


# ---------------------------------------------------------------------------
# input loading


def read_structure(path: str) -> list[GridPoint]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    try:
        return list(parse_structure_text(text).points)
    except StructureError as exc:
        raise InputError(f"{path}: {exc}") from exc


def read_tree(arg: str):
    text = arg
    if not arg.lstrip().startswith("(") and Path(arg).is_file():
        text = Path(arg).read_text(encoding="utf-8")
    try:
        return parse_snowflake(text)
    except TreeError as exc:
        raise InputError(f"snowflake: {exc}") from exc


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_solve(args) -> int:
    points = read_structure(args.structure)
    t = read_tree(args.tree)
    shape = eval_tree(t)
    if shape.is_trivial():
        raise InputError("the target shape must have at least two nodes")
    world = new_world(points, round_cap=args.round_cap)
    t0 = time.perf_counter()
    try:
        res = solve(world, t)
    except TrivialShape as exc:
        raise InputError(str(exc)) from exc
    tree_text = serialize_snowflake(t)
    report = RunReport(
        structure=args.structure,
        tree=tree_text,
        seed=args.seed,
        input_hash=input_hash(points, tree_text, args.seed),
        k_max=res.k_max,
        rounds_used=res.rounds_used,
        strategy=res.strategy,
        search_trace=list(res.search_trace),
        placements={r: sorted(res.placements[r]) for r in range(6)},
        wall_time=time.perf_counter() - t0,
    )
    code = 0
    if args.check:
        ok = check_report(report, points, shape)
        report.check = "PASS" if ok else "FAIL"
        code = 0 if ok else EXIT_MISMATCH
    _write(report.to_text(), args.out)
    return code


def _parse_mask(mask: str | None, k: int) -> str:
    if mask is None or mask == "all":
        return "1" * k
    if len(mask) != k or set(mask) - {"0", "1"}:
        raise InputError(f"mask must be {k} characters of 0/1")
    if "1" not in mask:
        raise InputError("at least one q_i must be occupied")
    return mask


def cmd_generate(args) -> int:
    seed = args.seed if args.seed is not None else 0
    if args.kind == "lower-bound":
        if args.k is None or args.k < 2:
            raise InputError("lower-bound needs --k >= 2")
        mask = _parse_mask(args.mask, args.k)
        pts, expected = oracle.gen_lower_bound(args.k, mask)
        header = f"lower-bound k={args.k} mask={mask}"
        _write(format_structure_text(pts, header), args.out)
        sidecar = "# expected placements of the two-arm shape at scale k, rotation 0\n"
        sidecar += "".join(f"{p.x} {p.y}\n" for p in sorted(expected))
        if args.out:
            Path(args.out + ".expected").write_text(sidecar, encoding="utf-8")
            sys.stdout.write(sidecar)
        else:
            sys.stderr.write(sidecar)
        return 0
    if args.kind == "random-structure":
        if args.n is None or args.n < 1:
            raise InputError("random-structure needs --n >= 1")
        pts = oracle.gen_random_structure(args.n, seed)
        _write(format_structure_text(pts, f"random-structure n={args.n} seed={seed}"), args.out)
        return 0
    if args.max_nodes is None or args.max_nodes < 1:
        raise InputError("random-tree needs --max-nodes >= 1")
    t = oracle.gen_random_snowflake(args.max_nodes, seed)
    _write(serialize_snowflake(t) + "\n", args.out)
    return 0


def render_svg(points, report: RunReport | None = None) -> str:
    """SVG drawing of a structure with optional placement rings per rotation."""
    pts = sorted(GridPoint(p[0], p[1]) for p in points)
    occ = set(pts)
    xy = {p: embed(p) for p in pts}
    xs = [v[0] for v in xy.values()] or [0.0]
    ys = [v[1] for v in xy.values()] or [0.0]
    x0, x1, y0, y1 = min(xs) - 1, max(xs) + 1, min(ys) - 1, max(ys) + 1
    width, height = (x1 - x0) * PX, (y1 - y0) * PX

    def sx(v) -> str:
        return f"{(v[0] - x0) * PX:.2f}"

    def sy(v) -> str:
        return f"{(y1 - v[1]) * PX:.2f}"

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.2f}" height="{height:.2f}" '
        f'viewBox="0 0 {width:.2f} {height:.2f}">',
        '<g class="edges" stroke="#888" stroke-width="2">',
    ]
    for p in pts:
        for d in (Direction.E, Direction.NE, Direction.NW):
            q = p + UNIT[d]
            if q in occ:
                out.append(
                    f'<line class="edge" x1="{sx(xy[p])}" y1="{sy(xy[p])}" x2="{sx(xy[q])}" y2="{sy(xy[q])}"/>'
                )
    out.append("</g>")
    out.append('<g class="nodes" fill="#222">')
    for p in pts:
        out.append(f'<circle class="node" cx="{sx(xy[p])}" cy="{sy(xy[p])}" r="6"/>')
    out.append("</g>")
    if report is not None:
        out.append('<g class="placements" fill="none" stroke-width="2">')
        for r in range(6):
            color, dash = ROTATION_STYLES[r]
            extra = f' stroke-dasharray="{dash}"' if dash else ""
            for p in sorted(report.placements.get(r, [])):
                v = embed(p)
                out.append(
                    f'<circle class="placement r{r}" cx="{sx(v)}" cy="{sy(v)}" r="{10 + 2 * r}" stroke="{color}"{extra}/>'
                )
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cmd_render(args) -> int:
    points = read_structure(args.structure)
    report = None
    if args.report:
        try:
            report = RunReport.from_text(Path(args.report).read_text(encoding="utf-8"))
        except (OSError, KeyError, ValueError) as exc:
            raise InputError(f"{args.report}: {exc}") from exc
    _write(render_svg(points, report), args.out)
    return 0


DEFAULT_SWEEPS = {
    "line": [2**i for i in range(4, 13)],
    "triangle": [2, 4, 8, 16, 32, 64],
    "snowflake": [1, 2, 3, 4, 5, 6],
}
BENCH_SNOWFLAKE = "(union (tri NE 1) (shift W 2 (sum NE 1 (line E 1))))"


def bench_row(suite: str, size: int) -> dict:
    """One benchmark measurement; ``size`` is n for the line suite and the scale otherwise."""
    if suite == "line":
        world = new_world([(x, 0) for x in range(size)])
        Counters.establish(world)
        solve_unit_line(world, Direction.E)
        return {"suite": suite, "size": size, "n": size, "rounds": world.round, "k_max": size - 1,
                "feature": math.log2(size)}
    if suite == "triangle":
        t = tri(Direction.E, 1)
    else:
        t = parse_snowflake(BENCH_SNOWFLAKE)
    pts = scale(eval_tree(t), size).nodes
    world = new_world(pts)
    res = solve(world, t)
    if suite == "triangle":
        feature = math.log2(res.k_max + 2) ** 2
    else:
        k_bound = max((k for k, _ in res.search_trace), default=0)
        feature = k_bound * math.log2(k_bound + 2)
    return {"suite": suite, "size": size, "n": len(pts), "rounds": res.rounds_used, "k_max": res.k_max,
            "feature": feature}


def fit_rounds(rows: list[dict]) -> tuple[float, float] | None:
    """Least-squares slope and intercept of rounds against the suite's complexity feature."""
    if len(rows) < 2:
        return None
    x = np.array([r["feature"] for r in rows], dtype=float)
    y = np.array([r["rounds"] for r in rows], dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


FEATURE_NAMES = {"line": "log2(n)", "triangle": "log2(k+2)^2", "snowflake": "K*log2(K+2)"}


def cmd_bench(args) -> int:
    if args.sizes is None:
        sizes = DEFAULT_SWEEPS[args.suite]
    else:
        try:
            sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
        except ValueError as exc:
            raise InputError(f"bad --sizes: {exc}") from exc
    rows = [bench_row(args.suite, s) for s in sizes]
    lines = ["suite\tsize\tn\tk_max\trounds\tfeature"]
    for r in rows:
        lines.append(f"{r['suite']}\t{r['size']}\t{r['n']}\t{r['k_max']}\t{r['rounds']}\t{r['feature']:.6f}")
    table = "\n".join(lines) + "\n"
    _write(table, args.out)
    fit = fit_rounds(rows)
    feat = FEATURE_NAMES[args.suite]
    if fit is None:
        sys.stderr.write(f"{args.suite}: {len(rows)} rows, no fit\n")
    else:
        sys.stderr.write(f"{args.suite}: {len(rows)} rows, rounds ~ {fit[0]:.3f}*{feat} + {fit[1]:.3f}\n")
    return 0


def cmd_check_shape(args) -> int:
    t = read_tree(args.tree)
    s = eval_tree(t)
    star, centers = is_star_convex(s)
    lines = [
        f"tree {serialize_snowflake(t)}",
        f"nodes {len(s.nodes)} edges {len(s.edges)} faces {len(s.faces)}",
        f"star-convex {'yes' if star else 'no'}",
    ]
    if star:
        lines.append("centers " + " ".join(f"{c.x},{c.y}" for c in sorted(centers)))
    for a in Axis:
        lines.append(f"width {a.name} {axis_width(s, a)}")
    sym = [r for r in range(1, 6) if is_r_symmetric(s, r)[0]]
    lines.append("rotational-symmetry " + (" ".join(str(r) for r in sym) if sym else "none"))
    if star:
        c = min(centers)
        moved = translate_shape(s, GridPoint(-c.x, -c.y))
        _, tree = star_convex_decompose(moved)
        lines.append(f"decomposition-center {c.x},{c.y}")
        lines.append(f"decomposition {serialize_snowflake(tree)}")
    _write("\n".join(lines) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="amoebot-containment", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="maximum scale and placements of a snowflake shape")
    p.add_argument("structure")
    p.add_argument("tree", help="snowflake DSL text or a file holding it")
    p.add_argument("--check", action="store_true", help="cross-check against the brute-force oracle")
    p.add_argument("--round-cap", type=int, default=DEFAULT_ROUND_CAP)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("generate", help="write generated structures or trees")
    p.add_argument("kind", choices=["lower-bound", "random-structure", "random-tree"])
    p.add_argument("--k", type=int)
    p.add_argument("--mask", help="0/1 string, q_0 first, or 'all'")
    p.add_argument("--n", type=int)
    p.add_argument("--max-nodes", type=int)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("render", help="SVG drawing of a structure")
    p.add_argument("structure")
    p.add_argument("--report")
    p.add_argument("--out")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("bench", help="round counts over a size sweep")
    p.add_argument("suite", choices=sorted(DEFAULT_SWEEPS))
    p.add_argument("--sizes", help="comma separated sizes; empty for none")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("check-shape", help="star convexity, widths, symmetry and decomposition")
    p.add_argument("tree")
    p.add_argument("--out")
    p.set_defaults(func=cmd_check_shape)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except RoundLimitExceeded as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ROUND_CAP


if __name__ == "__main__":
    raise SystemExit(main())

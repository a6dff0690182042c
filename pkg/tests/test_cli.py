import random
import subprocess
import sys

import pytest

from amoebot_containment.cli import (
    EXIT_INPUT,
    EXIT_ROUND_CAP,
    REPORT_MAGIC,
    RunReport,
    check_report,
    input_hash,
    main,
    render_svg,
)
from amoebot_containment.oracle import gen_random_snowflake, gen_random_structure
from amoebot_containment.runtime import format_structure_text, parse_structure_text
from amoebot_containment.shapes import eval_tree, make_triangle, parse_snowflake, serialize_snowflake
from amoebot_containment.trigrid import Direction, GridPoint

from support import host_structure, nontrivial_tree


def _write_structure(path, points):
    path.write_text(format_structure_text(points))
    return str(path)


def _solve(tmp_path, points, tree, *extra):
    s = _write_structure(tmp_path / "s.txt", points)
    out = tmp_path / "r.txt"
    code = main(["solve", s, tree, "--out", str(out), *extra])
    return code, RunReport.from_text(out.read_text()), out.read_text()


def _strip_wall_time(text):
    return "\n".join(line for line in text.splitlines() if not line.startswith("wall-time"))


def test_solve_triangle(tmp_path):
    code, report, text = _solve(tmp_path, make_triangle(Direction.E, 6).nodes, "(tri E 1)", "--check")
    assert code == 0
    assert text.startswith(f"{REPORT_MAGIC} 1\n")
    assert report.k_max == 6 and report.check == "PASS"
    assert report.placements[0] == [GridPoint(0, 0)]


def test_solve_is_deterministic(tmp_path):
    pts = gen_random_structure(60, 5)
    _, a, ta = _solve(tmp_path, pts, "(sum NE 1 (line E 1))", "--seed", "3")
    _, b, tb = _solve(tmp_path, pts, "(sum NE 1 (line E 1))", "--seed", "3")
    assert _strip_wall_time(ta) == _strip_wall_time(tb)
    assert a.input_hash == input_hash(pts, "(sum NE 1 (line E 1))", 3)
    assert a.input_hash != input_hash(pts, "(sum NE 1 (line E 1))", 4)


def test_report_roundtrip(tmp_path):
    _, report, _ = _solve(tmp_path, make_triangle(Direction.E, 3).nodes, "(tri E 1)")
    assert RunReport.from_text(report.to_text()).to_text() == report.to_text()
    with pytest.raises(ValueError):
        RunReport.from_text("something else\n")


def test_check_on_random_instances(tmp_path):
    for seed in range(50):
        t, _ = nontrivial_tree(seed, max_nodes=4)
        pts = host_structure(eval_tree(t), random.Random(seed).randint(0, 2), 40, seed)
        code, report, _ = _solve(tmp_path, pts, serialize_snowflake(t), "--check")
        assert code == 0 and report.check == "PASS", serialize_snowflake(t)


def test_check_rejects_corrupted_reports(tmp_path):
    pts = make_triangle(Direction.E, 4).nodes
    shape = make_triangle(Direction.E, 1)
    _, report, _ = _solve(tmp_path, pts, "(tri E 1)")
    assert check_report(report, pts, shape)
    rng = random.Random(0)
    for _ in range(20):
        bad = RunReport.from_text(report.to_text())
        r = rng.randrange(6)
        choice = rng.randrange(3)
        if choice == 0:
            bad.k_max += rng.choice([-1, 1])
        elif choice == 1 or not bad.placements[r]:
            extra = rng.choice(sorted(set(pts) - set(bad.placements[r])))
            bad.placements[r] = sorted(bad.placements[r] + [extra])
        else:
            bad.placements[r] = bad.placements[r][1:]
        assert not check_report(bad, pts, shape)
    dup = RunReport.from_text(report.to_text())
    dup.placements[0] = dup.placements[0] * 2
    assert not check_report(dup, pts, shape)


def test_solve_input_errors(tmp_path, capsys):
    s = _write_structure(tmp_path / "s.txt", make_triangle(Direction.E, 2).nodes)
    assert main(["solve", s, "(line Q 1)"]) == EXIT_INPUT
    err = capsys.readouterr().err
    assert "6" in err
    assert main(["solve", s, "(line E 0)"]) == EXIT_INPUT
    assert main(["solve", str(tmp_path / "missing.txt"), "(line E 1)"]) == EXIT_INPUT
    (tmp_path / "bad.txt").write_text("0 0\n5 5\n")
    assert main(["solve", str(tmp_path / "bad.txt"), "(line E 1)"]) == EXIT_INPUT


def test_solve_round_cap_exit(tmp_path):
    s = _write_structure(tmp_path / "s.txt", make_triangle(Direction.E, 6).nodes)
    assert main(["solve", s, "(tri E 1)", "--round-cap", "20"]) == EXIT_ROUND_CAP


def test_tree_from_file(tmp_path):
    (tmp_path / "t.dsl").write_text("(tri E 1)\n")
    code, report, _ = _solve(tmp_path, make_triangle(Direction.E, 2).nodes, str(tmp_path / "t.dsl"))
    assert code == 0 and report.k_max == 2


def test_generate_lower_bound(tmp_path):
    out = tmp_path / "lb.txt"
    assert main(["generate", "lower-bound", "--k", "6", "--mask", "all", "--out", str(out)]) == 0
    assert len(parse_structure_text(out.read_text())) == 120
    sidecar = (tmp_path / "lb.txt.expected").read_text().splitlines()
    assert len([line for line in sidecar if not line.startswith("#")]) == 6
    assert main(["generate", "lower-bound", "--k", "4", "--mask", "0000"]) == EXIT_INPUT
    assert main(["generate", "lower-bound"]) == EXIT_INPUT


def test_generate_random(tmp_path, capsys):
    out = tmp_path / "rs.txt"
    assert main(["generate", "random-structure", "--n", "200", "--seed", "7", "--out", str(out)]) == 0
    assert len(parse_structure_text(out.read_text())) == 200
    assert main(["generate", "random-tree", "--max-nodes", "6", "--seed", "7"]) == 0
    text = capsys.readouterr().out.strip()
    assert parse_snowflake(text) == gen_random_snowflake(6, 7)
    assert main(["generate", "random-structure"]) == EXIT_INPUT


def test_render(tmp_path):
    pts = sorted(make_triangle(Direction.E, 2).nodes)
    s = _write_structure(tmp_path / "s.txt", pts)
    svg = tmp_path / "a.svg"
    assert main(["render", s, "--out", str(svg)]) == 0
    text = svg.read_text()
    assert text.count('class="node"') == 6 and text.count('class="edge"') == 9
    assert render_svg(pts) == text
    _solve(tmp_path, pts, "(tri E 1)")
    assert main(["render", s, "--report", str(tmp_path / "r.txt"), "--out", str(svg)]) == 0
    assert 'class="placement r0"' in svg.read_text()
    assert main(["render", s, "--report", str(tmp_path / "s.txt")]) == EXIT_INPUT


def test_bench(tmp_path, capsys):
    assert main(["bench", "line", "--sizes", "16,32,64"]) == 0
    captured = capsys.readouterr()
    rows = captured.out.strip().splitlines()
    assert rows[0].split("\t") == ["suite", "size", "n", "k_max", "rounds", "feature"]
    rounds = [int(r.split("\t")[4]) for r in rows[1:]]
    assert len(rounds) == 3 and rounds == sorted(rounds)
    assert "rounds ~" in captured.err
    assert main(["bench", "triangle", "--sizes", ""]) == 0
    captured = capsys.readouterr()
    assert captured.out.strip().splitlines() == ["suite\tsize\tn\tk_max\trounds\tfeature"]
    assert "no fit" in captured.err


def test_check_shape(capsys):
    assert main(["check-shape", "(tri E 2)"]) == 0
    out = capsys.readouterr().out
    assert "star-convex yes" in out and "width X 0" in out and "decomposition " in out
    assert "rotational-symmetry 2 4" in out
    assert main(["check-shape", "(union (tri NE 1) (shift W 2 (sum NE 1 (line E 1))))"]) == 0
    assert "star-convex no" in capsys.readouterr().out


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "amoebot_containment", "check-shape", "(line E 2)"],
        capture_output=True,
        text=True,
        check=True,
    )
    assert "width X 2" in res.stdout

import json
import subprocess
import sys

import numpy as np
import pytest

from dualclip.bench import AlgorithmsDisagree, sweep
from dualclip.cli import main
from dualclip.io import (FormatError, clipper_to_dict, load_clipper, load_region, read_lines, save_clipper,
                         save_region, write_lines)
from dualclip.semidual2d import build_clipper_2d, clip_o1_2d_batch
from dualclip.semidual3d import build_clipper_3d, clip_o1_3d_batch
from dualclip.workload import gen_convex_polygon, gen_convex_polyhedron, gen_lines

from helpers import intervals_match


def test_square_region_roundtrip(tmp_path, square):
    save_region(square, tmp_path / "sq.json")
    assert json.loads((tmp_path / "sq.json").read_text()) == {"vertices": square.vertices.tolist()}
    back = load_region(tmp_path / "sq.json")
    assert np.array_equal(back.vertices, square.vertices)


def test_polyhedron_roundtrip(tmp_path, cube):
    save_region(cube, tmp_path / "c.json")
    back = load_region(tmp_path / "c.json")
    assert np.array_equal(back.facets, cube.facets) and np.allclose(back.normals, cube.normals)


def test_lines_roundtrip_exact(tmp_path):
    lines = np.random.default_rng(0).normal(size=(100, 2, 3))
    write_lines(lines, tmp_path / "l.csv")
    assert np.array_equal(read_lines(tmp_path / "l.csv"), lines)


@pytest.mark.parametrize("text,where", [
    ("a,b,c,d\n1,2,3,4\n", "line 1"),
    ("x0,y0,x1,y1\n1,2,3\n", "line 2"),
    ("x0,y0,x1,y1\n0,0,1,1\n1,2,nan,4\n", "line 3, field 3"),
    ("x0,y0,x1,y1\n1,1,1,1\n", "zero-length"),
])
def test_read_lines_errors(tmp_path, text, where):
    (tmp_path / "l.csv").write_text(text)
    with pytest.raises(FormatError, match=where):
        read_lines(tmp_path / "l.csv")


def test_clipper_roundtrip_2d(tmp_path):
    poly = gen_convex_polygon(12, 1)
    c = build_clipper_2d(poly, 9, 40, 7, 35)
    save_clipper(c, tmp_path / "c.json")
    back = load_clipper(tmp_path / "c.json")
    assert clipper_to_dict(back) == clipper_to_dict(c)
    lines = gen_lines(poly, 1000, 0.5, 2)
    a = clip_o1_2d_batch(c, lines[:, 0], lines[:, 1])
    b = clip_o1_2d_batch(back, lines[:, 0], lines[:, 1])
    assert intervals_match(a, b, tol=0.0)


def test_clipper_roundtrip_3d(tmp_path):
    poly = gen_convex_polyhedron(130, 1)
    c = build_clipper_3d(poly, 8, 9, 10, 11)
    save_clipper(c, tmp_path / "c.json")
    back = load_clipper(tmp_path / "c.json")
    lines = gen_lines(poly, 1000, 0.5, 2)
    assert intervals_match(clip_o1_3d_batch(c, lines[:, 0], lines[:, 1]),
                           clip_o1_3d_batch(back, lines[:, 0], lines[:, 1]), tol=0.0)


def test_clipper_unknown_version(tmp_path, square):
    save_clipper(build_clipper_2d(square, 2, 2, 2, 2), tmp_path / "c.json")
    data = json.loads((tmp_path / "c.json").read_text())
    data["version"] = 99
    (tmp_path / "c.json").write_text(json.dumps(data))
    with pytest.raises(FormatError, match="version"):
        load_clipper(tmp_path / "c.json")
    assert main(["clip", "--clipper", str(tmp_path / "c.json"), "--lines", "x"]) == 2


def test_bench_report_identities():
    rep = sweep(2, [4, 10], [300], [0.0, 1.0], [5], [20], seed=3)
    assert len(rep.rows) == 4
    for row in rep.rows:
        assert row["v1"] == row["cb_cost"] / row["o1_cost"]
        assert row["v2"] == row["cb_cost"] / (row["o1_cost"] + row["prep_cost"])
    rep.rows[0]["v1"] += 1
    with pytest.raises(AssertionError):
        rep.to_csv()


def test_bench_csv_structure():
    text = sweep(3, [12], [100], [0.5], [6], [6], seed=1).to_csv()
    header, row = text.strip().split("\n")
    assert header.startswith("N,M,Pr,n_k,n_q,n_m,n_p,prep_cost,cb_cost,o1_cost,v1,v2")
    assert len(row.split(",")) == len(header.split(","))


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_gen_clip_equivalence(tmp_path, capsys):
    d = tmp_path / "w"
    assert _run(["gen", "--n", "10", "--m", "500", "--pr", "0.5", "--seed", "7", "--out", str(d)], capsys)[0] == 0
    region, lines = str(d / "region.json"), str(d / "lines.csv")
    assert _run(["build", "--region", region, "--clipper", str(tmp_path / "c.json")], capsys)[0] == 0
    outs = {}
    for algo in ("o1", "oracle", "cb"):
        code, out, _ = _run(["clip", "--region", region, "--lines", lines, "--algo", algo], capsys)
        assert code == 0
        outs[algo] = out
    assert outs["o1"] == outs["oracle"] == outs["cb"]
    code, out, _ = _run(["clip", "--clipper", str(tmp_path / "c.json"), "--lines", lines], capsys)
    assert out == outs["oracle"]
    assert len(out.strip().split("\n")) == 501


def test_cli_empty_lines_file(tmp_path, capsys, square):
    save_region(square, tmp_path / "r.json")
    (tmp_path / "l.csv").write_text("x0,y0,x1,y1\n")
    code, out, _ = _run(["clip", "--region", str(tmp_path / "r.json"), "--lines", str(tmp_path / "l.csv")], capsys)
    assert code == 0 and out == "index,status,t_enter,t_exit,ex0,ey0,ex1,ey1\n"


def test_cli_results_format(tmp_path, capsys, square):
    save_region(square, tmp_path / "r.json")
    write_lines(np.array([[[-2, 0], [2, 0]], [[-2, 3], [2, 3]]], float), tmp_path / "l.csv")
    _, out, _ = _run(["clip", "--region", str(tmp_path / "r.json"), "--lines", str(tmp_path / "l.csv")], capsys)
    assert out.split("\n")[1:3] == ["0,interval,0.25,0.75,-1,0,1,0", "1,empty,,,,,,"]


def test_cli_malformed_input_exit_2(tmp_path, capsys, square):
    save_region(square, tmp_path / "r.json")
    (tmp_path / "l.csv").write_text("x0,y0,x1,y1\n0,0,abc,1\n")
    code, _, err = _run(["clip", "--region", str(tmp_path / "r.json"), "--lines", str(tmp_path / "l.csv")], capsys)
    assert code == 2 and "line 2, field 3" in err
    (tmp_path / "bad.json").write_text("{\"vertices\": [[0, 0], [1, 0]")
    code, _, err = _run(["build", "--region", str(tmp_path / "bad.json")], capsys)
    assert code == 2 and "line 1" in err


def test_cli_disagreement_exit_3(tmp_path, capsys, monkeypatch, square):
    import dualclip.cli as cli

    save_region(square, tmp_path / "r.json")
    write_lines(np.array([[[-2, 0], [2, 0]]], float), tmp_path / "l.csv")

    def broken(clipper, p0, p1):
        return np.array([0.3]), np.array([0.75])

    monkeypatch.setattr(cli, "clip_o1_2d_batch", broken)
    code, _, err = _run(["clip", "--region", str(tmp_path / "r.json"), "--lines", str(tmp_path / "l.csv"),
                         "--verify"], capsys)
    assert code == 3 and "algorithms disagree" in err and "segment" in err


def test_bench_disagreement_raises(monkeypatch):
    import dualclip.bench as bench
    from dualclip.geometry import ClipResult

    monkeypatch.setattr(bench, "clip_o1_2d", lambda c, s, counter=None: ClipResult.empty())
    with pytest.raises(AlgorithmsDisagree):
        bench.sweep(2, [5], [50], [1.0], [4], [10])


def test_cli_stats_mean_non_increasing(capsys):
    code, out, _ = _run(["stats", "--n", "10", "--nk", "1,10,100,1000", "--nq", "50"], capsys)
    assert code == 0
    rows = [r.split(",") for r in out.strip().split("\n")[1:]]
    kq = [float(r[5]) for r in rows]
    mp = [float(r[6]) for r in rows]
    assert all(b <= a for a, b in zip(kq, kq[1:])) and all(b <= a for a, b in zip(mp, mp[1:]))


def test_cli_byte_deterministic(tmp_path):
    def run(tag):
        d = tmp_path / tag
        d.mkdir()
        cmds = [
            ["gen", "--dim", "3", "--n", "60", "--m", "200", "--seed", "5", "--out", str(d)],
            ["build", "--region", str(d / "region.json"), "--clipper", str(d / "c.json"), "--out", str(d / "b.csv")],
            ["clip", "--clipper", str(d / "c.json"), "--lines", str(d / "lines.csv"), "--out", str(d / "r.csv")],
            ["bench-e2", "--n", "3,5", "--m", "200", "--seed", "5", "--out", str(d / "e2.csv")],
            ["bench-e3", "--n", "12", "--m", "100", "--seed", "5", "--format", "json", "--out", str(d / "e3.json")],
            ["stats", "--region", str(d / "region.json"), "--lines", str(d / "lines.csv"), "--out", str(d / "s.csv")],
        ]
        for c in cmds:
            assert main(c) == 0
        return {p.name: p.read_bytes() for p in sorted(d.iterdir())}

    assert run("a") == run("b")


def test_console_script_entry():
    out = subprocess.run([sys.executable, "-m", "dualclip.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "bench-e2" in out.stdout

"""``dualclip`` command line: generate, build, clip, benchmark, report.

Exit codes: 0 ok, 2 malformed input, 3 algorithms disagree.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .bench import AlgorithmsDisagree, _agree, sweep
from .cost import weighted_cost
from .cyrus_beck import OpCounter, clip_cyrus_beck_2d_batch, clip_cyrus_beck_3d_batch
from .geometry import ConvexPolyhedron
from .io import (FormatError, dumps_csv, fmt, load_clipper, load_region, read_lines, region_to_dict,
                 results_rows, save_clipper, save_region, write_lines)
from .oracle import oracle_clip_batch
from .semidual2d import ael_statistics, build_clipper_2d, clip_o1_2d_batch, recommend_subdivision
from .semidual3d import afl_statistics, build_clipper_3d, clip_o1_3d_batch
from .workload import WorkloadSpec

DEFAULTS = {2: (10, 50), 3: (15, 15)}


def _ints(text):
    return [int(v) for v in str(text).split(",") if v.strip()]


def _floats(text):
    return [float(v) for v in str(text).split(",") if v.strip()]


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _table(columns, rows, fmt_name):
    """rows are lists of already formatted strings"""
    if fmt_name == "json":
        return json.dumps([dict(zip(columns, r)) for r in rows], indent=1) + "\n"
    return dumps_csv(columns, rows)


def _subdivision(args, dim, region=None):
    if getattr(args, "recommend", False) and dim == 2:
        s = recommend_subdivision(region)
        return s.n_k, s.n_q, s.n_m, s.n_p
    nk = args.nk if args.nk is not None else DEFAULTS[dim][0]
    nq = args.nq if args.nq is not None else DEFAULTS[dim][1]
    nm = args.nm if args.nm is not None else nk
    np_ = args.np if args.np is not None else nq
    return nk, nq, nm, np_


def _build(region, sub, counter=None):
    if isinstance(region, ConvexPolyhedron):
        return build_clipper_3d(region, *sub, counter=counter)
    return build_clipper_2d(region, *sub, counter=counter)


def cmd_gen(args):
    spec = WorkloadSpec(args.dim, args.n, args.m, args.pr, args.seed)
    region = spec.region()
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    save_region(region, args.region or out / "region.json")
    write_lines(spec.lines(region), args.lines or out / "lines.csv")


def cmd_build(args):
    region = load_region(args.region)
    dim = region.vertices.shape[1]
    counter = OpCounter()
    clipper = _build(region, _subdivision(args, dim, region), counter)
    if args.clipper:
        save_clipper(clipper, args.clipper)
    rows = []
    if dim == 2:
        st = ael_statistics(clipper)
        for name in ("kq", "mp"):
            g = st[name]
            rows.append([name, str(g["n_slope"]), str(g["n_intercept"]), fmt(g["mean"]), str(g["max"])])
    else:
        st = afl_statistics(clipper)
        for number, g in st["grids"].items():
            grid = clipper.grids()[number]
            rows.append([str(number), str(grid.n_slope), str(grid.n_intercept), fmt(g["mean"]), str(g["max"])])
    prep = fmt(weighted_cost(counter))
    columns = ["grid", "n_slope", "n_intercept", "mean_list", "max_list", "prep_cost"]
    _emit(_table(columns, [r + [prep] for r in rows], args.format), args.out)


def _clip_all(algo, region, clipper, lines):
    p0, p1 = lines[:, 0], lines[:, 1]
    if algo == "oracle":
        return oracle_clip_batch(region, p0, p1)
    if algo == "cb":
        fn = clip_cyrus_beck_3d_batch if isinstance(region, ConvexPolyhedron) else clip_cyrus_beck_2d_batch
        return fn(region, p0, p1)
    fn = clip_o1_3d_batch if isinstance(region, ConvexPolyhedron) else clip_o1_2d_batch
    return fn(clipper, p0, p1)


def cmd_clip(args):
    clipper = load_clipper(args.clipper) if args.clipper else None
    if args.region:
        region = load_region(args.region)
    elif clipper is not None:
        region = clipper.polygon if hasattr(clipper, "polygon") else clipper.poly
    else:
        raise FormatError("clip needs --region or --clipper")
    dim = region.vertices.shape[1]
    if not args.lines:
        raise FormatError("clip needs --lines")
    lines = read_lines(args.lines, dim)
    if clipper is None and args.algo == "o1" and len(lines):
        clipper = _build(region, _subdivision(args, dim, region))
    if len(lines):
        res = _clip_all(args.algo, region, clipper, lines)
    else:
        res = (np.empty(0), np.empty(0))
    if args.verify and len(lines):
        ref = oracle_clip_batch(region, lines[:, 0], lines[:, 1])
        ok = _agree(res, ref)
        if not ok.all():
            k = int(np.argmin(ok))
            raise AlgorithmsDisagree(
                f"algorithms disagree on line {k}: {args.algo} gives [{res[0][k]}, {res[1][k]}], "
                f"oracle gives [{ref[0][k]}, {ref[1][k]}]", region, lines[k])
    header, rows = results_rows(lines.reshape(-1, 2, dim), *res)
    _emit(_table(header, rows, args.format), args.out)


def _cmd_bench(dim):
    def run(args):
        report = sweep(dim, _ints(args.n), _ints(args.m), _floats(args.pr),
                       _ints(args.nk if args.nk is not None else DEFAULTS[dim][0]),
                       _ints(args.nq if args.nq is not None else DEFAULTS[dim][1]),
                       _ints(args.nm) if args.nm is not None else None,
                       _ints(args.np) if args.np is not None else None,
                       seed=args.seed, wallclock=args.wallclock)
        _emit(report.to_json() if args.format == "json" else report.to_csv(), args.out)
    return run


def cmd_stats(args):
    if args.region:
        region = load_region(args.region)
        dim = region.vertices.shape[1]
    else:
        dim = args.dim
        region = WorkloadSpec(dim, int(args.n), 1, 0.0, args.seed).region()
    nks = _ints(args.nk if args.nk is not None else DEFAULTS[dim][0])
    nqs = _ints(args.nq if args.nq is not None else DEFAULTS[dim][1])
    lines = read_lines(args.lines, dim) if args.lines else None
    rows = []
    if dim == 2:
        columns = ["N", "n_k", "n_q", "n_m", "n_p", "ael_mean_kq", "ael_mean_mp", "ael_max_kq", "ael_max_mp"]
        for nk in nks:
            for nq in nqs:
                nm = int(args.nm) if args.nm is not None else nk
                npp = int(args.np) if args.np is not None else nq
                st = ael_statistics(build_clipper_2d(region, nk, nq, nm, npp))
                rows.append([str(region.n), str(nk), str(nq), str(nm), str(npp), fmt(st["kq"]["mean"]),
                             fmt(st["mp"]["mean"]), str(st["kq"]["max"]), str(st["mp"]["max"])])
    else:
        columns = ["N", "n_k", "n_q", "n_m", "n_p"] + [f"afl_mean_{g}" for g in range(1, 7)] + [
            "omega_mean_before", "omega_mean_after", "omega_max_after"]
        for nk in nks:
            for nq in nqs:
                nm = int(args.nm) if args.nm is not None else nk
                npp = int(args.np) if args.np is not None else nq
                clipper = build_clipper_3d(region, nk, nq, nm, npp)
                st = afl_statistics(clipper, *((lines[:, 0], lines[:, 1]) if lines is not None else ()))
                extra = [fmt(st["mean_before"]), fmt(st["mean_after"]), str(st["max_after"])] if "lines" in st \
                    else ["", "", ""]
                rows.append([str(region.n), str(nk), str(nq), str(nm), str(npp)]
                            + [fmt(st["grids"][g]["mean"]) for g in range(1, 7)] + extra)
    _emit(_table(columns, rows, args.format), args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dualclip", description="O(1) line clipping in semidual space")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, lists=False):
        kind = str if lists else int
        p.add_argument("--nk", type=kind)
        p.add_argument("--nq", type=kind)
        p.add_argument("--nm", type=kind)
        p.add_argument("--np", type=kind)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out")

    p = sub.add_parser("gen", help="write a seeded region and line file")
    common(p)
    p.add_argument("--dim", type=int, choices=(2, 3), default=2)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--m", type=int, default=1000)
    p.add_argument("--pr", type=float, default=0.5)
    p.add_argument("--region")
    p.add_argument("--lines")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("build", help="build and serialize a clipper")
    common(p)
    p.add_argument("--region", required=True)
    p.add_argument("--clipper", help="where to write the serialized clipper")
    p.add_argument("--recommend", action="store_true", help="2D: use the recommended subdivision")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("clip", help="clip a line file")
    common(p)
    p.add_argument("--region")
    p.add_argument("--lines")
    p.add_argument("--clipper", help="prebuilt clipper for --algo o1")
    p.add_argument("--algo", choices=("cb", "o1", "oracle"), default="o1")
    p.add_argument("--verify", action="store_true", help="check against the oracle, exit 3 on mismatch")
    p.add_argument("--recommend", action="store_true")
    p.set_defaults(func=cmd_clip)

    for name, dim, ns, m in (("bench-e2", 2, "3,4,5,10,20,50", "10000"), ("bench-e3", 3, "4,12,60,500", "1000")):
        p = sub.add_parser(name, help=f"{dim}D cost sweep")
        common(p, lists=True)
        p.add_argument("--n", default=ns)
        p.add_argument("--m", default=m)
        p.add_argument("--pr", default="0.5")
        p.add_argument("--wallclock", action="store_true", help="add (non-deterministic) timing columns")
        p.set_defaults(func=_cmd_bench(dim))

    p = sub.add_parser("stats", help="active list statistics over subdivisions")
    common(p, lists=True)
    p.add_argument("--region")
    p.add_argument("--dim", type=int, choices=(2, 3), default=2)
    p.add_argument("--n", default="10")
    p.add_argument("--lines", help="3D: sample lines for candidate counts")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except AlgorithmsDisagree as exc:
        print(f"dualclip: {exc}", file=sys.stderr)
        if exc.region is not None:
            print("region: " + json.dumps(region_to_dict(exc.region)), file=sys.stderr)
            print("segment: " + json.dumps(np.asarray(exc.segment).tolist()), file=sys.stderr)
        return 3
    except (FormatError, ValueError, OSError) as exc:
        print(f"dualclip: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

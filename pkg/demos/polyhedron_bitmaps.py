"""Candidate facets in 3D: two projection planes, two bitmaps, one AND.

Run:  python3 demos/polyhedron_bitmaps.py
"""
import numpy as np

from dualclip import Segment, build_clipper_3d, clip_o1_3d, gen_convex_polyhedron, gen_lines
from dualclip.oracle import clip_halfspace_oracle
from dualclip.semidual3d import afl_statistics

poly = gen_convex_polyhedron(500, seed=4)
clipper = build_clipper_3d(poly, 30, 30, 30, 30)
print(f"{poly.n} facets, six grids of {30 * 30} cells, built in {clipper.build_seconds:.3f} s")

lines = gen_lines(poly, 5, 1.0, seed=5)
for p0, p1 in lines:
    seg = Segment(p0, p1)
    trace = {}
    r = clip_o1_3d(clipper, seg, trace=trace)
    ref = clip_halfspace_oracle(poly, seg)
    sizes = [m.popcount() for m in trace["planes"]]
    print(f"planes {sizes} -> omega {trace['omega'].popcount():3d} -> t [{r.t_enter:.5f}, {r.t_exit:.5f}]"
          f"  (oracle [{ref.t_enter:.5f}, {ref.t_exit:.5f}])")

sample = gen_lines(poly, 2000, 1.0, seed=6)
st = afl_statistics(clipper, sample[:, 0], sample[:, 1])
print(f"mean candidates per plane {st['mean_before']:.1f}, after AND {st['mean_after']:.1f}")
print("per-grid mean popcount:", {k: round(v["mean"], 1) for k, v in st["grids"].items()})

"""Walk one line through the 2D semidual clipper and compare with Cyrus-Beck.

Run:  python3 demos/clip_polygon_walkthrough.py
"""
import numpy as np

from dualclip import OpCounter, Segment, build_clipper_2d, clip_cyrus_beck_2d, clip_o1_2d, gen_convex_polygon
from dualclip.cost import weighted_cost
from dualclip.geometry import to_semidual

polygon = gen_convex_polygon(20, seed=3)
clipper = build_clipper_2d(polygon, 20, 200, 20, 200)
print(f"polygon with {polygon.n} edges, centred box at {np.round(clipper.center, 3)}, h = {clipper.h:.3f}")

seg = Segment((-3.0, -0.4), (3.0, 0.9))
rep = to_semidual(np.subtract(seg.p0, clipper.center), np.subtract(seg.p1, clipper.center))
print(f"carrier line: branch {rep.branch.value}, slope {rep.slope:.4f}, intercept {rep.intercept:.4f}")

trace = {}
fast, slow = OpCounter(), OpCounter()
r1 = clip_o1_2d(clipper, seg, fast, trace=trace)
r2 = clip_cyrus_beck_2d(polygon, seg, slow)
i, j = trace["cell"]
print(f"cell ({i}, {j}) lists edges {clipper.grid(rep.branch).ael(i, j).tolist()}, so {trace['tests']} edge tests")
print(f"O(1):        t in [{r1.t_enter:.6f}, {r1.t_exit:.6f}]  cost {weighted_cost(fast):.0f}")
print(f"Cyrus-Beck:  t in [{r2.t_enter:.6f}, {r2.t_exit:.6f}]  cost {weighted_cost(slow):.0f}")

# a line far away never touches a cell
miss = clip_o1_2d(clipper, Segment((-3, 5), (3, 5.2)), trace=trace)
print(f"far line: empty={miss.is_empty}, cell={trace['cell']}")

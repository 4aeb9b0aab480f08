"""How the active edge lists shrink as the semidual grids get finer.

Refining the intercept axis pays off much more than refining the slope axis.

Run:  python3 demos/subdivision_study.py
"""
from dualclip import build_clipper_2d, gen_convex_polygon, recommend_subdivision
from dualclip.semidual2d import ael_statistics

polygon = gen_convex_polygon(10, seed=1)

print("n_q sweep at n_k = 10")
for nq in (1, 2, 5, 10, 20, 50, 100, 200, 500, 1000):
    st = ael_statistics(build_clipper_2d(polygon, 10, nq, 10, nq))
    print(f"  n_q={nq:5d}  mean AEL {st['kq']['mean']:.3f}  max {st['kq']['max']}")

print("n_k sweep at n_q = 50")
for nk in (1, 10, 100, 1000):
    st = ael_statistics(build_clipper_2d(polygon, nk, 50, nk, 50))
    print(f"  n_k={nk:5d}  mean AEL {st['kq']['mean']:.3f}  max {st['kq']['max']}")

rec = recommend_subdivision(polygon)
st = ael_statistics(build_clipper_2d(polygon, rec.n_k, rec.n_q, rec.n_m, rec.n_p))
print(f"gap-based subdivision {rec}: max AEL {st['kq']['max']} / {st['mp']['max']}")
print("(lines through two vertices touch four edges, so some cell always lists at least four)")

"""Operation-cost trade-off: where does preprocessing start to pay?

Costs are weighted operation counts, so the numbers are machine independent.

Run:  python3 demos/cost_tradeoff.py
"""
import math

from dualclip.bench import sweep
from dualclip.cost import theoretical_breakeven, theoretical_efficiency

print("2D model v1:", {n: round(theoretical_efficiency(n, 2)[0], 2) for n in (3, 4, 5, 10, 50)},
      f"breakeven N = {theoretical_breakeven(2):.2f}")
print("3D model v1:", {n: round(theoretical_efficiency(n, 3)[0], 2) for n in (1, 4, 25, 100)},
      f"breakeven N = {theoretical_breakeven(3):.2f}")

print("\nmeasured 2D, M = 5000 lines, Pr = 0.5")
print(sweep(2, [3, 5, 10, 20, 50], [5000], [0.5], [10], [50], seed=1).to_csv())

print("measured 3D, subdivision growing with sqrt(F)")
for f in (4, 12, 24, 60, 200):
    n = max(4, math.ceil(4 * math.sqrt(f)))
    row = sweep(3, [f], [1000], [0.5], [n], [n], seed=1).rows[0]
    print(f"  F={f:4d} n={n:3d}  v1={row['v1']:.2f}  v2={row['v2']:.3f}  detail tests/line {row['detail_tests_mean']:.1f}")

print("\nhit ratio sweep at N = 10: CB is flat, O(1) grows with the share of hits")
print(sweep(2, [10], [5000], [0.0, 0.25, 0.5, 0.75, 1.0], [10], [50], seed=1).to_csv())

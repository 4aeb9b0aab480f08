"""Weighted operation cost model and the theoretical efficiency estimates.

Costs are dot products of operation counts with per-class timings for
(assign, compare, add/sub, mul, div).  The default timings are the measured
(33, 50, 16, 20, 114) per 5e7 operations; only ratios are meaningful.
"""
from __future__ import annotations

from dataclasses import astuple, dataclass
from typing import Optional, Tuple

from .cyrus_beck import OpCounter

# operation mixes (assign, compare, addsub, mul, div)
CB3_PER_FACET = (9, 3, 6, 6, 1)
O1_3D_OVERHEAD = (18, 3, 8, 8, 4)

# 2D timing constants of the Cyrus-Beck and O(1) clippers in the same units
CB2_FIXED = 590
CB2_PER_EDGE = 621
O1_2D = 2020


@dataclass(frozen=True)
class CostModel:
    assign: float = 33
    compare: float = 50
    addsub: float = 16
    mul: float = 20
    div: float = 114

    def __post_init__(self):
        if min(astuple(self)) <= 0:
            raise ValueError("operation weights must be positive")

    def weights(self) -> Tuple[float, ...]:
        return astuple(self)


DEFAULT_MODEL = CostModel()


def weighted_cost(counter, model: CostModel = DEFAULT_MODEL) -> float:
    """Time units of an :class:`OpCounter` (or a plain 5-tuple of counts)."""
    counts = counter.as_tuple() if isinstance(counter, OpCounter) else tuple(counter)
    return float(sum(c * w for c, w in zip(counts, model.weights())))


def cb_cost(n: int, dimension: int, model: CostModel = DEFAULT_MODEL) -> float:
    if dimension == 2:
        return CB2_FIXED + CB2_PER_EDGE * n
    return n * weighted_cost(CB3_PER_FACET, model)


def o1_cost(dimension: int, model: CostModel = DEFAULT_MODEL) -> float:
    if dimension == 2:
        return O1_2D
    # fixed part plus a Cyrus-Beck pass over the two facets actually hit
    return weighted_cost(O1_3D_OVERHEAD, model) + cb_cost(2, 3, model)


def theoretical_efficiency(n: int, dimension: int, t_prep: float = 0.0, m: int = 1,
                           model: CostModel = DEFAULT_MODEL) -> Tuple[float, Optional[float]]:
    """(v1, v2) of the O(1) clipper over Cyrus-Beck for an N-edge/facet region.

    ``v1`` ignores preprocessing; ``v2`` adds ``t_prep`` amortised over ``m``
    lines and is None when no preprocessing cost is given.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    cb = cb_cost(n, dimension, model)
    o1 = o1_cost(dimension, model)
    v2 = cb / (o1 + t_prep / m) if t_prep else None
    return cb / o1, v2


def theoretical_breakeven(dimension: int, model: CostModel = DEFAULT_MODEL) -> float:
    """Real-valued N at which v1 = 1."""
    if dimension == 2:
        return (O1_2D - CB2_FIXED) / CB2_PER_EDGE
    return o1_cost(3, model) / cb_cost(1, 3, model)

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dualclip.cost import (CostModel, cb_cost, o1_cost, theoretical_breakeven, theoretical_efficiency,
                           weighted_cost)
from dualclip.cyrus_beck import OpCounter
from dualclip.geometry import ConvexPolygon, ConvexPolyhedron
from dualclip.oracle import oracle_clip_batch
from dualclip.semidual2d import recommend_subdivision
from dualclip.workload import WorkloadSpec, gen_convex_polygon, gen_convex_polyhedron, gen_lines


def test_polygon_triangle_ccw():
    poly = gen_convex_polygon(3, 0)
    assert isinstance(poly, ConvexPolygon) and poly.n == 3


@given(st.integers(3, 60), st.integers(0, 2**63 - 1))
def test_polygon_deterministic_and_valid(n, seed):
    a, b = gen_convex_polygon(n, seed), gen_convex_polygon(n, seed)
    assert np.array_equal(a.vertices, b.vertices) and a.n == n


def test_polygon_50_all_criteria_defined():
    for seed in range(5):
        rec = recommend_subdivision(gen_convex_polygon(50, seed))
        assert rec.defaulted == ()


def test_polyhedron_tetrahedron():
    p = gen_convex_polyhedron(4, 1)
    edges = {tuple(sorted((f[i], f[(i + 1) % 3]))) for f in p.facets for i in range(3)}
    assert (len(p.vertices), p.n, len(edges)) == (4, 4, 6)
    assert len(p.vertices) - len(edges) + p.n == 2


def test_polyhedron_2112():
    p = gen_convex_polyhedron(2112, 0)
    assert len(p.vertices) == 1058 and p.n == 2112


@given(st.sampled_from([4, 6, 12, 40, 100]), st.integers(0, 10**9))
def test_polyhedron_valid_and_deterministic(f, seed):
    a, b = gen_convex_polyhedron(f, seed), gen_convex_polyhedron(f, seed)
    assert isinstance(a, ConvexPolyhedron) and a.n == f
    assert np.array_equal(a.vertices, b.vertices) and np.array_equal(a.facets, b.facets)


def test_polyhedron_rejects_odd():
    with pytest.raises(ValueError):
        gen_convex_polyhedron(7, 0)


@pytest.mark.parametrize("pr,hits", [(0.0, 0), (1.0, 1000), (0.5, 500)])
def test_lines_exact_hit_count_2d(pr, hits):
    poly = gen_convex_polygon(8, 3)
    lines = gen_lines(poly, 1000, pr, 4)
    t, _ = oracle_clip_batch(poly, lines[:, 0], lines[:, 1])
    assert (~np.isnan(t)).sum() == hits


def test_lines_half_of_ten_thousand():
    poly = gen_convex_polygon(10, 1)
    lines = gen_lines(poly, 10_000, 0.5, 2)
    t, _ = oracle_clip_batch(poly, lines[:, 0], lines[:, 1])
    assert (~np.isnan(t)).sum() == 5000


def test_lines_3d_and_deterministic():
    poly = gen_convex_polyhedron(60, 3)
    a = gen_lines(poly, 400, 0.25, 9)
    assert np.array_equal(a, gen_lines(poly, 400, 0.25, 9))
    t, _ = oracle_clip_batch(poly, a[:, 0], a[:, 1])
    assert (~np.isnan(t)).sum() == 100


def test_workload_definition():
    spec = WorkloadSpec(2, 6, 50, 0.3, 11)
    assert np.array_equal(spec.lines(), spec.lines())
    with pytest.raises(ValueError):
        WorkloadSpec(3, 3, 10, 0.5, 0)
    with pytest.raises(ValueError):
        WorkloadSpec(2, 5, 10, 1.5, 0)


def test_weighted_cost_values():
    assert weighted_cost(OpCounter()) == 0
    assert weighted_cost((9, 3, 6, 6, 1)) == 777
    assert weighted_cost((18, 3, 8, 8, 4)) == 1488
    assert o1_cost(3) == 3042
    assert cb_cost(7, 3) == 777 * 7


def test_cost_model_positive():
    with pytest.raises(ValueError):
        CostModel(assign=0)


def test_theoretical_efficiency_values():
    assert theoretical_efficiency(10, 2)[0] == pytest.approx(6800 / 2020)
    assert round(theoretical_efficiency(25, 3)[0], 2) == 6.39
    assert round(theoretical_efficiency(1, 3)[0], 2) == 0.26
    v1, v2 = theoretical_efficiency(10, 2, t_prep=2020 * 100, m=100)
    assert v2 == pytest.approx(v1 / 2)


def test_theoretical_efficiency_increasing():
    for dim in (2, 3):
        v = [theoretical_efficiency(n, dim)[0] for n in range(1, 200)]
        assert all(b > a for a, b in zip(v, v[1:]))


def test_breakeven_2d_between_2_and_3():
    assert 2 < theoretical_breakeven(2) < 3
    assert theoretical_efficiency(2, 2)[0] < 1 < theoretical_efficiency(3, 2)[0]

"""Seeded test instances: convex polygons, sphere-hull polyhedra and line sets
with an exact share of lines that hit the region."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull

from .geometry import ConvexPolygon, ConvexPolyhedron
from .oracle import oracle_clip_batch


@dataclass(frozen=True)
class WorkloadSpec:
    dimension: int
    n: int
    m: int
    pr: float
    seed: int
    extent: float = 1.0

    def __post_init__(self):
        if self.dimension not in (2, 3):
            raise ValueError("dimension must be 2 or 3")
        if self.n < (3 if self.dimension == 2 else 4):
            raise ValueError("region too small")
        if self.m < 1:
            raise ValueError("need at least one line")
        if not 0.0 <= self.pr <= 1.0:
            raise ValueError("pr must lie in [0, 1]")

    def region(self):
        if self.dimension == 2:
            return gen_convex_polygon(self.n, self.seed, self.extent)
        return gen_convex_polyhedron(self.n, self.seed, self.extent)

    def lines(self, region=None):
        region = self.region() if region is None else region
        return gen_lines(region, self.m, self.pr, self.seed + 1)


def _is_strictly_convex(v: np.ndarray, min_turn: float) -> bool:
    e = np.roll(v, -1, axis=0) - v
    f = np.roll(e, -1, axis=0)
    cross = e[:, 0] * f[:, 1] - e[:, 1] * f[:, 0]
    scale = np.linalg.norm(e, axis=1) * np.linalg.norm(f, axis=1)
    return bool(np.all(cross > min_turn * scale))


def gen_convex_polygon(n: int, seed: int, extent: float = 1.0) -> ConvexPolygon:
    """N points at sorted random angles on a random ellipse, counter-clockwise."""
    if n < 3:
        raise ValueError("a polygon needs at least 3 vertices")
    rng = np.random.default_rng(seed)
    for _ in range(100):
        ang = np.sort(rng.uniform(0.0, 2 * np.pi, n))
        gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * np.pi]]))
        if gaps.max() >= np.pi or gaps.min() < 0.05 / n:
            continue
        rx, ry = extent * rng.uniform(0.6, 1.0, 2)
        rot = rng.uniform(0.0, np.pi)
        pts = np.column_stack([rx * np.cos(ang), ry * np.sin(ang)])
        c, s = math.cos(rot), math.sin(rot)
        pts = pts @ np.array([[c, s], [-s, c]]) + extent * rng.uniform(-0.5, 0.5, 2)
        if not _is_strictly_convex(pts, 1e-6):
            continue
        if len(np.unique(pts[:, 1])) < n or len(np.unique(pts[:, 0])) < n:
            continue
        return ConvexPolygon(pts)
    ang = 2 * np.pi * np.arange(n) / n + math.sqrt(2)
    return ConvexPolygon(extent * np.column_stack([np.cos(ang), np.sin(ang)]))


def gen_convex_polyhedron(target_facets: int, seed: int, extent: float = 1.0) -> ConvexPolyhedron:
    """Hull of ``target_facets / 2 + 2`` random points on a sphere of radius ``extent``.

    Points in general position on a sphere are all extreme and the hull is a
    triangulation with F = 2V - 4.
    """
    if target_facets < 4 or target_facets % 2:
        raise ValueError("target_facets must be even and >= 4")
    rng = np.random.default_rng(seed)
    nv = target_facets // 2 + 2
    for _ in range(100):
        p = rng.normal(size=(nv, 3))
        p = extent * p / np.linalg.norm(p, axis=1, keepdims=True)
        hull = ConvexHull(p)
        if len(hull.vertices) != nv or len(hull.simplices) != target_facets:
            continue
        facets = _orient_outward(p, hull.simplices)
        a, b, c = (p[facets[:, i]] for i in range(3))
        area = np.linalg.norm(np.cross(b - a, c - a), axis=1)
        if area.min() < 1e-9 * extent * extent:
            continue
        return ConvexPolyhedron(p, facets)
    raise RuntimeError("could not generate a polyhedron in general position")


def _orient_outward(points: np.ndarray, simplices: np.ndarray) -> np.ndarray:
    f = np.array(simplices, dtype=np.int64)
    a, b, c = (points[f[:, i]] for i in range(3))
    n = np.cross(b - a, c - a)
    inward = np.einsum("ij,ij->i", n, points.mean(axis=0) - a) > 0
    f[inward] = f[inward][:, [0, 2, 1]]
    return f


def cube_polyhedron(half: float = 1.0) -> ConvexPolyhedron:
    """Axis-aligned cube [-half, half]^3 split into 12 triangles."""
    v = half * np.array([[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)], float)
    faces = []
    for axis in range(3):
        for sign in (-1.0, 1.0):
            ids = [i for i in range(8) if v[i, axis] == sign * half]
            others = [k for k in range(3) if k != axis]
            centre = v[ids].mean(axis=0)
            ang = np.arctan2(v[ids, others[1]] - centre[others[1]], v[ids, others[0]] - centre[others[0]])
            ring = [ids[i] for i in np.argsort(ang)]
            faces += [[ring[0], ring[1], ring[2]], [ring[0], ring[2], ring[3]]]
    return ConvexPolyhedron(v, _orient_outward(v, np.array(faces)))


def regular_tetrahedron(size: float = 1.0) -> ConvexPolyhedron:
    v = size * np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], float)
    return ConvexPolyhedron(v, _orient_outward(v, np.array([[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]])))


def _extent(region) -> float:
    v = region.vertices
    return float(np.linalg.norm(v.max(axis=0) - v.min(axis=0))) / 2


def _interior_points(region, rng, k):
    w = rng.dirichlet(np.ones(len(region.vertices)) * 0.5, size=k)
    return w @ region.vertices


def gen_lines(region, m: int, pr: float, seed: int) -> np.ndarray:
    """``m`` segments, exactly ``round(pr * m)`` of which meet ``region``.

    Hitting segments run through two interior points and stick out of the
    region on both sides.  Missing segments are drawn within three times the
    region's extent and kept only if the oracle finds them empty.  Returns an
    (m, 2, dim) array of endpoints in shuffled order.
    """
    if not 0.0 <= pr <= 1.0:
        raise ValueError("pr must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    dim = region.vertices.shape[1]
    n_hit = int(round(pr * m))
    ext = _extent(region)
    center = (region.vertices.max(axis=0) + region.vertices.min(axis=0)) / 2

    a = _interior_points(region, rng, n_hit)
    b = _interior_points(region, rng, n_hit)
    u = b - a
    norm = np.linalg.norm(u, axis=1, keepdims=True)
    u = u / np.where(norm > 0, norm, 1.0)
    u[norm[:, 0] == 0] = 1.0 / math.sqrt(dim)
    back = ext * rng.uniform(2.1, 3.0, (n_hit, 1))
    fwd = ext * rng.uniform(2.1, 3.0, (n_hit, 1))
    hits = np.stack([a - back * u, a + fwd * u], axis=1)

    misses = np.empty((0, 2, dim))
    need = m - n_hit
    while len(misses) < need:
        k = max(64, 2 * (need - len(misses)))
        cand = center + 3 * ext * rng.uniform(-1.0, 1.0, (k, 2, dim))
        cand = cand[np.any(cand[:, 0] != cand[:, 1], axis=1)]
        t_in, _ = oracle_clip_batch(region, cand[:, 0], cand[:, 1])
        misses = np.concatenate([misses, cand[np.isnan(t_in)]])
    lines = np.concatenate([hits, misses[:need]])
    return lines[rng.permutation(m)]

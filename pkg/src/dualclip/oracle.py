"""Brute-force half-space clipping, kept independent of the clippers under test.

Half-spaces are rebuilt here from raw vertex data with unit inward normals,
oriented by the vertex centroid rather than by winding.  Nothing is imported
from the Cyrus-Beck or semidual modules.
"""
from __future__ import annotations

import numpy as np

from .geometry import (
    PARALLEL_TOL,
    T_TOL,
    ClipResult,
    ConvexPolygon,
    Segment,
)


def _halfspaces(region):
    """Rows (u, c) meaning u . x >= c, with |u| = 1 and u pointing inwards."""
    if isinstance(region, ConvexPolygon):
        v = region.vertices
        rows = []
        for i in range(len(v)):
            a, b = v[i], v[(i + 1) % len(v)]
            u = np.array([a[1] - b[1], b[0] - a[0]])
            rows.append((u / np.linalg.norm(u), a))
    else:
        v = region.vertices
        rows = []
        for i, j, k in region.facets:
            u = np.cross(v[j] - v[i], v[k] - v[i])
            rows.append((u / np.linalg.norm(u), v[i]))
    centroid = region.vertices.mean(axis=0)
    out = []
    for u, a in rows:
        if u @ (centroid - a) < 0:
            u = -u
        out.append((u, float(u @ a)))
    return out, region.vertices


def oracle_clip_batch(region, p0, p1):
    """Clip M segments against a convex polygon or polyhedron.

    Returns ``(t_enter, t_exit)`` arrays; empty results are NaN in both.
    """
    p0 = np.asarray(p0, float)
    d = np.asarray(p1, float) - p0
    halfspaces, verts = _halfspaces(region)
    extent = np.linalg.norm(verts.max(axis=0) - verts.min(axis=0))
    tol = 1e-9 * (1.0 + extent)
    dlen = np.linalg.norm(d, axis=1)

    lower = np.zeros(len(p0))
    upper = np.ones(len(p0))
    dead = np.zeros(len(p0), dtype=bool)
    for u, c in halfspaces:
        g0 = p0 @ u - c  # signed distance of p0, positive inside
        rate = d @ u
        flat = np.abs(rate) <= PARALLEL_TOL * dlen
        dead |= flat & (g0 < -tol)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = -g0 / rate
        lower = np.where(~flat & (rate > 0) & (t > lower), t, lower)
        upper = np.where(~flat & (rate < 0) & (t < upper), t, upper)

    empty = dead | (lower > upper + T_TOL)
    t_enter = np.where(empty, np.nan, lower)
    t_exit = np.where(empty, np.nan, np.maximum(lower, upper))
    return t_enter, t_exit


def clip_halfspace_oracle(region, seg: Segment) -> ClipResult:
    t_enter, t_exit = oracle_clip_batch(region, [seg.p0], [seg.p1])
    if np.isnan(t_enter[0]):
        return ClipResult.empty()
    return ClipResult.interval(float(t_enter[0]), float(t_exit[0]))

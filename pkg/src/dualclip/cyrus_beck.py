"""Cyrus-Beck clipping against convex polygons and polyhedra.

The scalar functions are instrumented: they tally every executed source
operation into an :class:`OpCounter` so that per-line cost can be weighed with
the (:=, <, +-, *, /) timing model in :mod:`dualclip.cost`.  The ``*_batch``
variants evaluate the same expressions with numpy over many segments.
"""
from __future__ import annotations

import math
from dataclasses import astuple, dataclass

import numpy as np

from .geometry import (
    PARALLEL_TOL,
    ClipResult,
    ConvexPolygon,
    ConvexPolyhedron,
    Segment,
    eps_geom,
    finish_interval,
    finish_interval_batch,
)


@dataclass
class OpCounter:
    assigns: int = 0
    compares: int = 0
    addsubs: int = 0
    muls: int = 0
    divs: int = 0

    def add(self, assigns=0, compares=0, addsubs=0, muls=0, divs=0):
        self.assigns += assigns
        self.compares += compares
        self.addsubs += addsubs
        self.muls += muls
        self.divs += divs

    def __iadd__(self, other: "OpCounter") -> "OpCounter":
        self.add(*astuple(other))
        return self

    def as_tuple(self):
        return astuple(self)

    def total(self) -> int:
        return sum(astuple(self))

    def reset(self):
        self.assigns = self.compares = self.addsubs = self.muls = self.divs = 0


def clip_cyrus_beck_2d(polygon: ConvexPolygon, seg: Segment, counter: OpCounter | None = None) -> ClipResult:
    x0, y0 = seg.p0
    dx = seg.p1[0] - x0
    dy = seg.p1[1] - y0
    dlen = math.hypot(dx, dy)
    eps = eps_geom(polygon.diameter)
    par = PARALLEL_TOL * dlen
    t_in, t_out = 0.0, 1.0
    # setup: d, |d|, tolerances, initial bounds
    asg, cmp_, add, mul, div = 7, 0, 3, 3, 0
    for ax, ay, _, _, nx, ny, nn in polygon.edge_rows:
        num = nx * (x0 - ax) + ny * (y0 - ay)
        den = nx * dx + ny * dy
        asg += 2
        add += 4
        mul += 5
        cmp_ += 1
        if abs(den) <= par * nn:
            cmp_ += 1
            mul += 1
            if num > eps * nn:
                _tally(counter, asg, cmp_, add, mul, div)
                return ClipResult.empty()
            continue
        t = -num / den
        asg += 1
        add += 1
        div += 1
        cmp_ += 2
        if den < 0.0:
            if t > t_in:
                t_in = t
                asg += 1
        elif t < t_out:
            t_out = t
            asg += 1
    cmp_ += 1
    _tally(counter, asg, cmp_, add, mul, div)
    return finish_interval(t_in, t_out)


def clip_cyrus_beck_3d(poly: ConvexPolyhedron, seg: Segment, counter: OpCounter | None = None) -> ClipResult:
    x0, y0, z0 = seg.p0
    dx = seg.p1[0] - x0
    dy = seg.p1[1] - y0
    dz = seg.p1[2] - z0
    dlen = math.sqrt(dx * dx + dy * dy + dz * dz)
    eps = eps_geom(poly.diameter)
    par = PARALLEL_TOL * dlen
    t_in, t_out = 0.0, 1.0
    asg, cmp_, add, mul, div = 8, 0, 5, 4, 0
    for (vx, vy, vz), _, _, (nx, ny, nz) in poly.facet_rows:
        wx = x0 - vx
        wy = y0 - vy
        wz = z0 - vz
        num = nx * wx + ny * wy + nz * wz
        den = nx * dx + ny * dy + nz * dz
        asg += 5
        add += 7
        mul += 6
        cmp_ += 1
        if abs(den) <= par:
            cmp_ += 1
            if num > eps:
                _tally(counter, asg, cmp_, add, mul, div)
                return ClipResult.empty()
            continue
        t = -num / den
        asg += 1
        add += 1
        div += 1
        cmp_ += 2
        if den < 0.0:
            if t > t_in:
                t_in = t
                asg += 1
        elif t < t_out:
            t_out = t
            asg += 1
    cmp_ += 1
    _tally(counter, asg, cmp_, add, mul, div)
    return finish_interval(t_in, t_out)


def _tally(counter, *counts):
    if counter is not None:
        counter.add(*counts)


def _reduce_bounds(num, den, par, eps):
    """Shared Cyrus-Beck reduction over an (M, N) table of numerators/denominators."""
    parallel = np.abs(den) <= par
    reject = np.any(parallel & (num > eps), axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = -num / den
    t_in = np.max(np.where(~parallel & (den < 0.0), t, 0.0), axis=1, initial=0.0)
    t_out = np.min(np.where(~parallel & (den > 0.0), t, 1.0), axis=1, initial=1.0)
    t_in = np.where(reject, 1.0, t_in)
    t_out = np.where(reject, 0.0, t_out)
    return finish_interval_batch(t_in, t_out)


def clip_cyrus_beck_2d_batch(polygon: ConvexPolygon, p0, p1):
    """Clip M segments at once; returns ``(t_enter, t_exit)`` with NaN for empty."""
    p0 = np.asarray(p0, float)
    d = np.asarray(p1, float) - p0
    a = polygon.vertices
    n = polygon.outward_normals()
    nn = np.hypot(n[:, 0], n[:, 1])
    num = n[None, :, 0] * (p0[:, None, 0] - a[None, :, 0]) + n[None, :, 1] * (p0[:, None, 1] - a[None, :, 1])
    den = n[None, :, 0] * d[:, None, 0] + n[None, :, 1] * d[:, None, 1]
    dlen = np.hypot(d[:, 0], d[:, 1])
    par = (PARALLEL_TOL * dlen)[:, None] * nn[None, :]
    eps = eps_geom(polygon.diameter) * nn[None, :]
    return _reduce_bounds(num, den, par, eps)


def clip_cyrus_beck_3d_batch(poly: ConvexPolyhedron, p0, p1):
    p0 = np.asarray(p0, float)
    d = np.asarray(p1, float) - p0
    v = poly.vertices[poly.facets[:, 0]]
    n = poly.normals
    w = p0[:, None, :] - v[None, :, :]
    num = n[None, :, 0] * w[..., 0] + n[None, :, 1] * w[..., 1] + n[None, :, 2] * w[..., 2]
    den = n[None, :, 0] * d[:, None, 0] + n[None, :, 1] * d[:, None, 1] + n[None, :, 2] * d[:, None, 2]
    dlen = np.sqrt(d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1] + d[:, 2] * d[:, 2])
    par = (PARALLEL_TOL * dlen)[:, None]
    return _reduce_bounds(num, den, par, eps_geom(poly.diameter))

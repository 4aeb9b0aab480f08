"""Expected O(1) line clipping against a convex polyhedron.

The polyhedron is projected onto the XY, XZ and YZ planes and every
projection gets a (k, q) and an (m, p) semidual grid, six grids in all.  A
cell holds a facet bitmap with bit f set when some line of the cell crosses
the projection of facet f.  A 3D line is projected onto the two planes that
contain its dominant axis; the AND of the two cell bitmaps leaves a handful of
candidate facets for the exact line-triangle test.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterator, Optional, Sequence, Tuple

import numpy as np

from .cyrus_beck import OpCounter
from .geometry import (
    PARALLEL_TOL,
    BoundingBox2,
    Branch,
    ClipResult,
    ConvexPolyhedron,
    LineRep,
    Plane,
    Segment,
    bounding_box,
    eps_geom,
    finish_interval,
    finish_interval_batch,
    rhomb_bound,
)
from .semidual2d import (
    SubdivisionTooFine,
    branch_frame,
    grid_corners,
    locate_cell,
    locate_cells,
    semidual_batch,
    vertex_sign_classes,
)

# bitmap bits across all six grids
DEFAULT_MAX_BITS = 2**31

_PLANES_FOR_AXIS = {0: (Plane.XY, Plane.XZ), 1: (Plane.XY, Plane.YZ), 2: (Plane.XZ, Plane.YZ)}


class AFLNotConservative(RuntimeError):
    pass


class FacetBitmap:
    """Fixed-length bit vector; bit i set means facet i is a member."""

    __slots__ = ("bits", "length")

    def __init__(self, bits: int, length: int):
        if bits < 0 or bits >> length:
            raise ValueError("bitmap has bits beyond its length")
        self.bits = bits
        self.length = length

    @classmethod
    def from_indices(cls, indices, length: int) -> "FacetBitmap":
        bits = 0
        for i in indices:
            bits |= 1 << int(i)
        return cls(bits, length)

    @classmethod
    def from_words(cls, words: np.ndarray, length: int) -> "FacetBitmap":
        return cls(int.from_bytes(np.ascontiguousarray(words, dtype="<u8").tobytes(), "little"), length)

    def to_words(self) -> np.ndarray:
        n_words = (self.length + 63) // 64
        return np.frombuffer(self.bits.to_bytes(8 * n_words, "little"), dtype="<u8").copy()

    def __and__(self, other: "FacetBitmap") -> "FacetBitmap":
        if self.length != other.length:
            raise ValueError("bitmap lengths differ")
        return FacetBitmap(self.bits & other.bits, self.length)

    def __eq__(self, other) -> bool:
        return isinstance(other, FacetBitmap) and (self.bits, self.length) == (other.bits, other.length)

    def __hash__(self):
        return hash((self.bits, self.length))

    def __len__(self) -> int:
        return self.length

    def __contains__(self, i: int) -> bool:
        return bool(self.bits >> i & 1)

    def __iter__(self) -> Iterator[int]:
        bits = self.bits
        while bits:
            low = bits & -bits
            yield low.bit_length() - 1
            bits ^= low

    def popcount(self) -> int:
        return self.bits.bit_count()

    def __repr__(self):
        return f"FacetBitmap({self.bits:#b}, length={self.length})"


@dataclass(frozen=True, eq=False)
class BitmapGrid:
    """A semidual grid whose cells hold facet bitmaps as rows of uint64 words."""

    branch: Branch
    n_slope: int
    n_intercept: int
    h: float
    words: np.ndarray  # (cells, n_words) uint64
    n_items: int

    @property
    def n_cells(self) -> int:
        return self.n_slope * self.n_intercept

    def cell_rect(self, i: int, j: int):
        s = grid_corners(self.n_slope, 1.0)
        q = grid_corners(self.n_intercept, self.h)
        return (s[j], s[j + 1], q[i], q[i + 1])

    def bitmap(self, i: int, j: int) -> FacetBitmap:
        return FacetBitmap(self._ints[i * self.n_slope + j], self.n_items)

    def popcounts(self) -> np.ndarray:
        return np.unpackbits(self.words.view(np.uint8), axis=1).sum(axis=1).reshape(self.n_intercept, self.n_slope)

    @cached_property
    def _ints(self) -> list:
        raw = self.words.astype("<u8").tobytes()
        step = 8 * self.words.shape[1]
        return [int.from_bytes(raw[c * step:(c + 1) * step], "little") for c in range(self.n_cells)]


@dataclass(frozen=True, eq=False)
class PlaneGrids:
    plane: Plane
    box: BoundingBox2
    h: float
    kq: BitmapGrid
    mp: BitmapGrid

    def grid(self, branch: Branch) -> BitmapGrid:
        return self.kq if branch is Branch.KQ else self.mp


@dataclass(frozen=True, eq=False)
class SemidualClipper3D:
    poly: ConvexPolyhedron
    planes: Dict[Plane, PlaneGrids]
    build_seconds: float = 0.0
    build_ops: OpCounter = field(default_factory=OpCounter)

    def grids(self) -> Dict[int, BitmapGrid]:
        """The six grids keyed by their number, odd = (k, q), even = (m, p)."""
        out = {}
        for plane, pg in self.planes.items():
            out[plane.grid_number(Branch.KQ)] = pg.kq
            out[plane.grid_number(Branch.MP)] = pg.mp
        return dict(sorted(out.items()))

    @cached_property
    def eps(self) -> float:
        return eps_geom(self.poly.diameter)


def _facet_interference(proj: np.ndarray, facets: np.ndarray, branch: Branch, n_slope, n_intercept, h, tol,
                        chunk_cells=1 << 22):
    """(cells, F) boolean: does some line of the cell cross the projected facet."""
    d, c = branch_frame(proj, branch)
    nv = len(proj)
    rows_per_chunk = max(1, chunk_cells // max(1, nv * n_slope))
    parts = []
    for i0 in range(0, n_intercept, rows_per_chunk):
        i1 = min(n_intercept, i0 + rows_per_chunk)
        above, below = vertex_sign_classes(d, c, n_slope, n_intercept, h, tol, rows=(i0, i1))
        a, b, cc = facets[:, 0], facets[:, 1], facets[:, 2]
        # a line misses a triangle iff all three corners lie strictly on one side
        miss = (above[a] & above[b] & above[cc]) | (below[a] & below[b] & below[cc])
        parts.append(~miss.reshape(len(facets), -1).T)
    return np.concatenate(parts, axis=0)


def _pack(hit: np.ndarray) -> np.ndarray:
    cells, n = hit.shape
    n_words = (n + 63) // 64
    padded = np.zeros((cells, n_words * 64), dtype=bool)
    padded[:, :n] = hit
    return np.packbits(padded, axis=1, bitorder="little").view("<u8")


def facet_interferes_cell(poly: ConvexPolyhedron, facet: int, plane: Plane, cell_rect, branch: Branch,
                          tol: float = 0.0, center=(0.0, 0.0)) -> bool:
    """Can some line of the cell cross the facet's projection onto ``plane``?

    Coordinates are taken relative to ``center`` (the projected box centre
    for a built clipper).  A line crosses a triangle iff it crosses one of its
    edges, which also covers triangles that project to a segment.
    """
    a, b = plane.axes
    pts = poly.vertices[poly.facets[facet]][:, [a, b]] - np.asarray(center, float)
    s0, s1, q0, q1 = cell_rect
    d, c = branch_frame(pts, branch)
    r = np.array([c - s * d - q for s, q in ((s0, q0), (s1, q0), (s0, q1), (s1, q1))])
    above = r.min(axis=0) > tol
    below = r.max(axis=0) < -tol
    return not (above.all() or below.all())


def build_clipper_3d(poly: ConvexPolyhedron, n_k: int, n_q: int, n_m: int, n_p: int,
                     max_bits: int = DEFAULT_MAX_BITS, counter: OpCounter | None = None) -> SemidualClipper3D:
    """Build the six facet-bitmap grids (three projections by two branches)."""
    if min(n_k, n_q, n_m, n_p) < 1:
        raise ValueError("subdivision counts must be >= 1")
    n_words = (poly.n + 63) // 64
    needed = 3 * (n_k * n_q + n_m * n_p) * n_words * 64
    if needed > max_bits:
        raise SubdivisionTooFine(needed, max_bits)
    started = time.perf_counter()
    ops = OpCounter()
    tol = eps_geom(poly.diameter)
    planes = {}
    nv, nf = len(poly.vertices), poly.n
    for plane in Plane:
        proj = poly.vertices[:, list(plane.axes)]
        box = bounding_box(proj)
        h = rhomb_bound(proj, box.center)
        centered = proj - np.asarray(box.center)
        ops.add(assigns=2 * nv + 1, addsubs=4 * nv, compares=6 * nv)
        grids = []
        for branch, ns, ni in ((Branch.KQ, n_k, n_q), (Branch.MP, n_m, n_p)):
            hit = _facet_interference(centered, poly.facets, branch, ns, ni, h, tol)
            grids.append(BitmapGrid(branch, ns, ni, h, _pack(hit), nf))
            cells = ns * ni
            corners = (ns + 1) * (ni + 1)
            ops.add(assigns=nv * corners, muls=nv * corners, addsubs=2 * nv * corners)
            ops.add(assigns=2 * nv * cells, compares=8 * nv * cells)
            ops.add(compares=6 * nf * cells, assigns=int(hit.sum()))
        planes[plane] = PlaneGrids(plane, box, h, grids[0], grids[1])
    if counter is not None:
        counter += ops
    return SemidualClipper3D(poly, planes, time.perf_counter() - started, ops)


def select_planes(direction: Sequence[float]) -> Tuple[Tuple[Plane, Branch], Tuple[Plane, Branch]]:
    """The two projection planes containing the dominant axis of ``direction``.

    Ties go to x, then y.  Each plane comes with the semidual branch of the
    projected direction.
    """
    d = [abs(float(v)) for v in direction]
    if max(d) == 0.0:
        raise ValueError("zero direction")
    axis = 0 if d[0] >= d[1] and d[0] >= d[2] else (1 if d[1] >= d[2] else 2)
    out = []
    for plane in _PLANES_FOR_AXIS[axis]:
        a, b = plane.axes
        out.append((plane, Branch.KQ if d[b] <= d[a] else Branch.MP))
    return out[0], out[1]


def _plane_rep(pg: PlaneGrids, p0, d) -> LineRep:
    a, b = pg.plane.axes
    u0 = p0[a] - pg.box.center[0]
    v0 = p0[b] - pg.box.center[1]
    du, dv = d[a], d[b]
    if abs(dv) <= abs(du):
        k = dv / du
        return LineRep(Branch.KQ, k, v0 - k * u0)
    m = du / dv
    return LineRep(Branch.MP, m, u0 - m * v0)


def _candidates(clipper: SemidualClipper3D, p0, d):
    """(bitmap, [per-plane bitmaps]) or (None, partial list) when a plane misses."""
    (pl1, _), (pl2, _) = select_planes(d)
    maps = []
    for plane in (pl1, pl2):
        pg = clipper.planes[plane]
        rep = _plane_rep(pg, p0, d)
        grid = pg.grid(rep.branch)
        cell = locate_cell(grid, rep)
        if cell is None:
            return None, maps
        maps.append(grid.bitmap(*cell))
    return maps[0] & maps[1], maps


def candidate_facets(clipper: SemidualClipper3D, seg: Segment) -> Optional[FacetBitmap]:
    """Candidate facets for a segment's carrier line, or None on a miss."""
    omega, _ = _candidates(clipper, seg.p0, seg.direction)
    return omega


def _detail(row, x0, y0, z0, dx, dy, dz, par, eps):
    """(t, den) where the carrier line meets the facet triangle, or None."""
    (vx, vy, vz), (ux, uy, uz), (wx_, wy_, wz_), (nx, ny, nz) = row
    wx = x0 - vx
    wy = y0 - vy
    wz = z0 - vz
    num = nx * wx + ny * wy + nz * wz
    den = nx * dx + ny * dy + nz * dz
    if abs(den) <= par:
        return None
    t = -num / den
    px = x0 + t * dx
    py = y0 + t * dy
    pz = z0 + t * dz
    for (ax, ay, az), (bx, by, bz) in (((vx, vy, vz), (ux, uy, uz)), ((ux, uy, uz), (wx_, wy_, wz_)),
                                       ((wx_, wy_, wz_), (vx, vy, vz))):
        ex, ey, ez = bx - ax, by - ay, bz - az
        qx, qy, qz = px - ax, py - ay, pz - az
        side = nx * (ey * qz - ez * qy) + ny * (ez * qx - ex * qz) + nz * (ex * qy - ey * qx)
        if side < -eps * math.sqrt(ex * ex + ey * ey + ez * ez):
            return None
    return t, den


# operation tally of one detail test: assigns, compares, addsubs, muls, divs
_DETAIL_OPS = (20, 5, 32, 33, 1)


def detail_test(poly: ConvexPolyhedron, facet_index: int, seg: Segment) -> Optional[float]:
    """Parameter where the segment's carrier line meets the facet, if it does.

    Points on the facet's edges and corners count as inside.
    """
    x0, y0, z0 = seg.p0
    dx, dy, dz = seg.direction
    par = PARALLEL_TOL * math.sqrt(dx * dx + dy * dy + dz * dz)
    hit = _detail(poly.facet_rows[facet_index], x0, y0, z0, dx, dy, dz, par, eps_geom(poly.diameter))
    return None if hit is None else hit[0]


def clip_o1_3d(clipper: SemidualClipper3D, seg: Segment, counter: OpCounter | None = None,
               audit: bool = False, trace: dict | None = None) -> ClipResult:
    """Clip a segment by testing only the facets in both selected cells.

    ``audit`` re-checks all facets and raises :class:`AFLNotConservative` if
    one is hit but missing from the candidate set.  ``trace`` receives the
    per-plane and final candidate bitmaps and the number of detail tests.
    """
    x0, y0, z0 = seg.p0
    dx, dy, dz = seg.direction
    omega, maps = _candidates(clipper, seg.p0, (dx, dy, dz))
    # direction, plane choice, two projections, two cell lookups, AND
    asg, cmp_, add, mul, div = 18, 3, 8, 8, 4
    n_words = (clipper.poly.n + 63) // 64
    if trace is not None:
        trace["planes"] = maps
        trace["omega"] = omega
        trace["tests"] = 0
    if omega is None:
        _tally(counter, asg, cmp_, add, mul, div)
        if audit:
            _audit(clipper, seg, FacetBitmap(0, clipper.poly.n))
        return ClipResult.empty()
    asg += n_words
    if audit:
        _audit(clipper, seg, omega)

    par = PARALLEL_TOL * math.sqrt(dx * dx + dy * dy + dz * dz)
    eps = clipper.eps
    rows = clipper.poly.facet_rows
    t_in = t_out = t_lo = t_hi = None
    tests = 0
    for f in omega:
        tests += 1
        hit = _detail(rows[f], x0, y0, z0, dx, dy, dz, par, eps)
        if hit is None:
            continue
        t, den = hit
        if t_lo is None or t < t_lo:
            t_lo = t
        if t_hi is None or t > t_hi:
            t_hi = t
        if den < 0.0:
            if t_in is None or t > t_in:
                t_in = t
        elif t_out is None or t < t_out:
            t_out = t
    asg += tests * _DETAIL_OPS[0]
    cmp_ += tests * _DETAIL_OPS[1] + 3
    add += tests * _DETAIL_OPS[2]
    mul += tests * _DETAIL_OPS[3]
    div += tests * _DETAIL_OPS[4]
    _tally(counter, asg, cmp_, add, mul, div)
    if trace is not None:
        trace["tests"] = tests
    if t_lo is None:
        return ClipResult.empty()
    return finish_interval(t_lo if t_in is None else t_in, t_hi if t_out is None else t_out)


def _tally(counter, *counts):
    if counter is not None:
        counter.add(*counts)


def _audit(clipper: SemidualClipper3D, seg: Segment, omega: FacetBitmap):
    poly = clipper.poly
    x0, y0, z0 = seg.p0
    dx, dy, dz = seg.direction
    par = PARALLEL_TOL * math.sqrt(dx * dx + dy * dy + dz * dz)
    missing = [f for f, row in enumerate(poly.facet_rows)
               if f not in omega and _detail(row, x0, y0, z0, dx, dy, dz, par, -clipper.eps) is not None]
    if missing:
        raise AFLNotConservative(f"facets {missing} hit by {seg} but not candidates")


def _locate_batch(clipper, p0, d, plane):
    pg = clipper.planes[plane]
    a, b = plane.axes
    p0c = p0[:, [a, b]] - np.asarray(pg.box.center)
    kq, slope, intercept = semidual_batch(p0c, d[:, [a, b]])
    cells = np.where(kq, locate_cells(pg.kq, slope, intercept), locate_cells(pg.mp, slope, intercept))
    return kq, cells


def candidate_words_batch(clipper: SemidualClipper3D, p0, p1):
    """Per segment: candidate bitmap words for each selected plane and their AND.

    Returns ``(omega1, omega2, omega, miss)``; rows with ``miss`` are zero.
    """
    p0 = np.asarray(p0, float)
    d = np.asarray(p1, float) - p0
    ad = np.abs(d)
    axis = np.where((ad[:, 0] >= ad[:, 1]) & (ad[:, 0] >= ad[:, 2]), 0, np.where(ad[:, 1] >= ad[:, 2], 1, 2))
    n_words = (clipper.poly.n + 63) // 64
    out1 = np.zeros((len(p0), n_words), dtype=np.uint64)
    out2 = np.zeros_like(out1)
    miss = np.zeros(len(p0), dtype=bool)
    for ax, (pl1, pl2) in _PLANES_FOR_AXIS.items():
        rows = np.nonzero(axis == ax)[0]
        if len(rows) == 0:
            continue
        for plane, out in ((pl1, out1), (pl2, out2)):
            kq, cells = _locate_batch(clipper, p0[rows], d[rows], plane)
            pg = clipper.planes[plane]
            words = np.where(kq[:, None], pg.kq.words[np.maximum(cells, 0) % pg.kq.n_cells],
                             pg.mp.words[np.maximum(cells, 0) % pg.mp.n_cells])
            out[rows] = words
            miss[rows] |= cells < 0
    out1[miss] = 0
    out2[miss] = 0
    return out1, out2, out1 & out2, miss


def popcount_words(words: np.ndarray) -> np.ndarray:
    return np.unpackbits(np.ascontiguousarray(words).view(np.uint8), axis=1).sum(axis=1)


def clip_o1_3d_batch(clipper: SemidualClipper3D, p0, p1):
    """Vectorised :func:`clip_o1_3d`; returns ``(t_enter, t_exit)``, NaN if empty."""
    p0 = np.asarray(p0, float)
    p1 = np.asarray(p1, float)
    d = p1 - p0
    _, _, omega, _ = candidate_words_batch(clipper, p0, p1)
    n = clipper.poly.n
    bits = np.unpackbits(omega.view(np.uint8), axis=1, bitorder="little")[:, :n]
    line, facet = np.nonzero(bits)
    poly = clipper.poly
    tri = poly.vertices[poly.facets[facet]]  # (K, 3, 3)
    nrm = poly.normals[facet]
    q0, dd = p0[line], d[line]
    w = q0 - tri[:, 0]
    num = nrm[:, 0] * w[:, 0] + nrm[:, 1] * w[:, 1] + nrm[:, 2] * w[:, 2]
    den = nrm[:, 0] * dd[:, 0] + nrm[:, 1] * dd[:, 1] + nrm[:, 2] * dd[:, 2]
    dlen = np.sqrt(dd[:, 0] * dd[:, 0] + dd[:, 1] * dd[:, 1] + dd[:, 2] * dd[:, 2])
    ok = ~(np.abs(den) <= PARALLEL_TOL * dlen)
    eps = clipper.eps
    # parallel rows give inf/nan here; they are already masked out by ``ok``
    with np.errstate(divide="ignore", invalid="ignore"):
        t = -num / den
        pt = q0 + t[:, None] * dd
        for i, j in ((0, 1), (1, 2), (2, 0)):
            e = tri[:, j] - tri[:, i]
            q = pt - tri[:, i]
            side = (nrm[:, 0] * (e[:, 1] * q[:, 2] - e[:, 2] * q[:, 1])
                    + nrm[:, 1] * (e[:, 2] * q[:, 0] - e[:, 0] * q[:, 2])
                    + nrm[:, 2] * (e[:, 0] * q[:, 1] - e[:, 1] * q[:, 0]))
            ok &= ~(side < -eps * np.sqrt(e[:, 0] * e[:, 0] + e[:, 1] * e[:, 1] + e[:, 2] * e[:, 2]))
    line, t, den = line[ok], t[ok], den[ok]
    m = len(p0)
    lo_all = np.full(m, np.inf)
    hi_all = np.full(m, -np.inf)
    enter = np.full(m, -np.inf)
    leave = np.full(m, np.inf)
    np.minimum.at(lo_all, line, t)
    np.maximum.at(hi_all, line, t)
    ent = den < 0.0
    np.maximum.at(enter, line[ent], t[ent])
    np.minimum.at(leave, line[~ent], t[~ent])
    hit = np.isfinite(lo_all)
    t_in = np.where(np.isfinite(enter), enter, lo_all)
    t_out = np.where(np.isfinite(leave), leave, hi_all)
    return finish_interval_batch(np.where(hit, t_in, 1.0), np.where(hit, t_out, 0.0))


def afl_statistics(clipper: SemidualClipper3D, p0=None, p1=None) -> dict:
    """Exact per-grid popcount statistics, plus sampled candidate counts.

    With sample lines given, reports the mean per-plane candidate count
    before the AND and the mean final count after it, over the lines that
    are not rejected outright.
    """
    out = {"build_seconds": clipper.build_seconds, "build_ops": clipper.build_ops.as_tuple(), "grids": {}}
    for number, grid in clipper.grids().items():
        pc = grid.popcounts()
        out["grids"][number] = {"branch": grid.branch.value, "mean": float(pc.mean()), "max": int(pc.max())}
    if p0 is not None:
        o1, o2, omega, miss = candidate_words_batch(clipper, p0, p1)
        keep = ~miss
        before = (popcount_words(o1[keep]) + popcount_words(o2[keep])) / 2.0
        after = popcount_words(omega[keep])
        out["lines"] = int(keep.sum())
        out["misses"] = int(miss.sum())
        out["mean_before"] = float(before.mean()) if keep.any() else 0.0
        out["mean_after"] = float(after.mean()) if keep.any() else 0.0
        out["max_after"] = int(after.max(initial=0))
    return out

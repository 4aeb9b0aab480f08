"""Expected O(1) line clipping against a convex polygon via semidual grids.

A line with |slope| <= 1 is the point (k, q) of ``y = k x + q``; a steeper one
is the point (m, p) of ``x = m y + p``.  Both spaces are bounded (slope in
[-1, 1], intercept in [-h, h] around the polygon centre) and cut into a grid.
Each cell stores the Active Edge List: every polygon edge that some line of
the cell can cross.  Clipping a line then only looks at the edges of its cell.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Tuple

import numpy as np

from .cyrus_beck import OpCounter
from .geometry import (
    PARALLEL_TOL,
    PARAM_TOL,
    BoundingBox2,
    Branch,
    ClipResult,
    ConvexPolygon,
    LineRep,
    Segment,
    bounding_box,
    eps_geom,
    finish_interval,
    finish_interval_batch,
    rhomb_bound,
)

DEFAULT_MAX_ENTRIES = 2**24


class SubdivisionTooFine(ValueError):
    def __init__(self, needed, limit):
        super().__init__(f"subdivision too fine: {needed} entries exceed the budget of {limit}")
        self.needed = needed
        self.limit = limit


class AELNotConservative(RuntimeError):
    pass


def branch_frame(points: np.ndarray, branch: Branch) -> Tuple[np.ndarray, np.ndarray]:
    """(abscissa, ordinate) columns of 2D points in a branch's frame."""
    if branch is Branch.KQ:
        return points[..., 0], points[..., 1]
    return points[..., 1], points[..., 0]


def grid_corners(n: int, half: float) -> np.ndarray:
    """Corner coordinates of n cells over [-half, half].

    Written as ``(2*half*i)/n - half`` so that corner 2i of the 2n-grid is
    bit-identical to corner i of the n-grid.
    """
    i = np.arange(n + 1, dtype=float)
    return (2.0 * half * i) / n - half


def vertex_sign_classes(abscissa, ordinate, n_slope, n_intercept, h, tol, rows=None):
    """Per vertex and cell: strictly above / strictly below every line of the cell.

    The residual ``c - s*d - q`` of a vertex (d, c) is affine in (s, q), so its
    extremes over a cell are reached at the four corners.  Returns boolean
    arrays ``above, below`` of shape (V, n_intercept, n_slope), or only the
    intercept rows ``range(*rows)`` when given.
    """
    i0, i1 = rows if rows is not None else (0, n_intercept)
    s = grid_corners(n_slope, 1.0)
    q = grid_corners(n_intercept, h)[i0:i1 + 1]
    d = np.asarray(abscissa, float)[:, None, None]
    c = np.asarray(ordinate, float)[:, None, None]
    r = c - s[None, None, :] * d - q[None, :, None]
    lo = np.minimum(np.minimum(r[:, :-1, :-1], r[:, 1:, :-1]), np.minimum(r[:, :-1, 1:], r[:, 1:, 1:]))
    hi = np.maximum(np.maximum(r[:, :-1, :-1], r[:, 1:, :-1]), np.maximum(r[:, :-1, 1:], r[:, 1:, 1:]))
    return lo > tol, hi < -tol


def edge_interferes_cell(edge, cell_rect, branch: Branch, tol: float = 0.0) -> bool:
    """Can some line of the cell cross the edge?

    ``edge`` is a pair of 2D points, ``cell_rect`` is
    ``(slope_lo, slope_hi, intercept_lo, intercept_hi)``.  A line crosses the
    edge iff the endpoint residuals do not share a strict sign, and because
    the residuals are affine over the cell this is decided at its corners.
    """
    (a, b) = np.asarray(edge, float)
    s0, s1, q0, q1 = cell_rect
    corners = [(s0, q0), (s1, q0), (s0, q1), (s1, q1)]
    classes = []
    for p in (a, b):
        d, c = branch_frame(p, branch)
        r = [c - s * d - q for s, q in corners]
        classes.append((min(r) > tol, max(r) < -tol))
    (above_a, below_a), (above_b, below_b) = classes
    return not ((above_a and above_b) or (below_a and below_b))


@dataclass(frozen=True, eq=False)
class SemidualGrid:
    """One subdivided semidual space with its per-cell item lists.

    Cell (i, j) covers intercepts ``[-h + 2h i/n_intercept, ...]`` and slopes
    ``[-1 + 2 j/n_slope, ...]``; its list is
    ``indices[offsets[c]:offsets[c + 1]]`` with ``c = i * n_slope + j``.
    """

    branch: Branch
    n_slope: int
    n_intercept: int
    h: float
    offsets: np.ndarray
    indices: np.ndarray

    @property
    def n_cells(self) -> int:
        return self.n_slope * self.n_intercept

    def cell_rect(self, i: int, j: int):
        s = grid_corners(self.n_slope, 1.0)
        q = grid_corners(self.n_intercept, self.h)
        return (s[j], s[j + 1], q[i], q[i + 1])

    def ael(self, i: int, j: int) -> np.ndarray:
        c = i * self.n_slope + j
        return self.indices[self.offsets[c]:self.offsets[c + 1]]

    def lengths(self) -> np.ndarray:
        return np.diff(self.offsets).reshape(self.n_intercept, self.n_slope)

    @cached_property
    def padded(self) -> np.ndarray:
        """(cells, max_len) table of item indices padded with -1."""
        lengths = np.diff(self.offsets)
        width = max(int(lengths.max(initial=0)), 1)
        table = np.full((self.n_cells, width), -1, dtype=np.int64)
        col = np.arange(len(self.indices)) - np.repeat(self.offsets[:-1], lengths)
        table[np.repeat(np.arange(self.n_cells), lengths), col] = self.indices
        return table

    @cached_property
    def _rows(self) -> list:
        return [self.indices[self.offsets[c]:self.offsets[c + 1]].tolist() for c in range(self.n_cells)]


def locate_cell(grid: SemidualGrid, rep: LineRep) -> Optional[Tuple[int, int]]:
    """Grid cell of a line, or None when |intercept| > h (the line misses)."""
    if rep.branch is not grid.branch:
        raise ValueError("line branch does not match grid branch")
    if abs(rep.intercept) > grid.h:
        return None
    i = min(int((rep.intercept + grid.h) * grid.n_intercept / (2.0 * grid.h)), grid.n_intercept - 1)
    j = min(int((rep.slope + 1.0) * grid.n_slope / 2.0), grid.n_slope - 1)
    return max(i, 0), max(j, 0)


def locate_cells(grid: SemidualGrid, slope, intercept) -> np.ndarray:
    """Vectorised :func:`locate_cell`; flat cell ids, -1 for out of range."""
    i = np.floor((intercept + grid.h) * grid.n_intercept / (2.0 * grid.h))
    j = np.floor((slope + 1.0) * grid.n_slope / 2.0)
    i = np.clip(i, 0, grid.n_intercept - 1).astype(np.int64)
    j = np.clip(j, 0, grid.n_slope - 1).astype(np.int64)
    return np.where(np.abs(intercept) > grid.h, -1, i * grid.n_slope + j)


@dataclass(frozen=True)
class Subdivision:
    n_k: int
    n_q: int
    n_m: int
    n_p: int
    defaulted: Tuple[str, ...] = ()
    capped: bool = False


def _min_gap(values) -> Optional[float]:
    u = np.unique(np.asarray(values, float))
    if len(u) < 2:
        return None
    return float(np.diff(u).min())


def recommend_subdivision(polygon: ConvexPolygon, max_cells: Optional[int] = None) -> Subdivision:
    """Subdivision counts from the minimal vertex-ordinate and edge-slope gaps.

    ``n_q = ceil(2a/dy) + 1`` and ``n_k = ceil(2/dk) + 1`` where ``a`` is the
    larger half-extent of the bounding box, ``dy`` the smallest positive gap
    between vertex ordinates and ``dk`` the smallest positive gap between the
    slopes of edges that live on the (k, q) branch; (m, p) is symmetric.  A gap
    set with fewer than two distinct values falls back to ``N`` and is listed
    in ``defaulted``.  Each (slope, intercept) pair is scaled down together
    when its product exceeds ``max_cells``.
    """
    if max_cells is not None and max_cells < 4:
        raise ValueError("max_cells must be at least 4")
    box = bounding_box(polygon)
    a = max(box.half_x, box.half_y)
    n = polygon.n
    v = polygon.vertices
    start, end = polygon.edges()
    e = end - start
    kq = np.abs(e[:, 1]) <= np.abs(e[:, 0])
    gaps = {
        "n_q": _min_gap(v[:, 1]),
        "n_p": _min_gap(v[:, 0]),
        "n_k": _min_gap(e[kq, 1] / e[kq, 0]),
        "n_m": _min_gap(e[~kq, 0] / e[~kq, 1]),
    }
    spans = {"n_q": 2 * a, "n_p": 2 * a, "n_k": 2.0, "n_m": 2.0}
    counts, defaulted = {}, []
    for name, gap in gaps.items():
        if gap is None:
            counts[name] = n
            defaulted.append(name)
        else:
            counts[name] = math.ceil(spans[name] / gap) + 1
    capped = False
    if max_cells is not None:
        for slope_name, icpt_name in (("n_k", "n_q"), ("n_m", "n_p")):
            cells = counts[slope_name] * counts[icpt_name]
            if cells > max_cells:
                f = math.sqrt(max_cells / cells)
                counts[slope_name] = max(1, math.floor(counts[slope_name] * f))
                counts[icpt_name] = max(1, math.floor(counts[icpt_name] * f))
                capped = True
    return Subdivision(counts["n_k"], counts["n_q"], counts["n_m"], counts["n_p"], tuple(defaulted), capped)


def adequate_subdivision(n: int) -> Subdivision:
    """Rule of thumb from the AEL-length experiments: N slope steps, 10 N intercept steps."""
    return Subdivision(n, 10 * n, n, 10 * n)


@dataclass(frozen=True, eq=False)
class SemidualClipper2D:
    polygon: ConvexPolygon
    box: BoundingBox2
    h: float
    grid_kq: SemidualGrid
    grid_mp: SemidualGrid
    build_seconds: float = 0.0
    build_ops: OpCounter = field(default_factory=OpCounter)

    @property
    def center(self) -> Tuple[float, float]:
        return self.box.center

    def grid(self, branch: Branch) -> SemidualGrid:
        return self.grid_kq if branch is Branch.KQ else self.grid_mp

    @cached_property
    def centered(self) -> np.ndarray:
        return self.polygon.vertices - np.asarray(self.center)

    @cached_property
    def eps(self) -> float:
        return eps_geom(self.polygon.diameter)

    @cached_property
    def _edge_rows(self) -> list:
        a = self.centered
        e = np.roll(a, -1, axis=0) - a
        n = np.column_stack([e[:, 1], -e[:, 0]])
        nn = np.hypot(n[:, 0], n[:, 1])
        return [tuple(float(x) for x in row) for row in np.column_stack([a, n, nn])]


def _build_grid(centered, branch, n_slope, n_intercept, h, tol, counter, chunk_cells=1 << 20):
    nv = len(centered)
    d, c = branch_frame(centered, branch)
    rows_per_chunk = max(1, chunk_cells // max(1, nv * n_slope))
    lists = []
    for i0 in range(0, n_intercept, rows_per_chunk):
        i1 = min(n_intercept, i0 + rows_per_chunk)
        above, below = vertex_sign_classes(d, c, n_slope, n_intercept, h, tol, rows=(i0, i1))
        nxt = np.roll(np.arange(nv), -1)
        hit = ~((above & above[nxt]) | (below & below[nxt]))  # (N edges, rows, n_slope)
        lists.append(hit.reshape(nv, -1).T)  # (cells, N)
    hit = np.concatenate(lists, axis=0)
    counts = hit.sum(axis=1)
    offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    indices = np.nonzero(hit)[1].astype(np.int64)
    if counter is not None:
        cells = n_slope * n_intercept
        corners = (n_slope + 1) * (n_intercept + 1)
        counter.add(assigns=n_slope + n_intercept + 2, muls=n_slope + n_intercept + 2,
                    divs=n_slope + n_intercept + 2, addsubs=n_slope + n_intercept + 2)
        counter.add(assigns=nv * corners, muls=nv * corners, addsubs=2 * nv * corners)
        counter.add(assigns=2 * nv * cells, compares=8 * nv * cells)
        counter.add(compares=4 * nv * cells, assigns=int(counts.sum()))
    return SemidualGrid(branch, n_slope, n_intercept, h, offsets, indices)


def build_clipper_2d(polygon: ConvexPolygon, n_k: int, n_q: int, n_m: int, n_p: int,
                     max_entries: int = DEFAULT_MAX_ENTRIES,
                     counter: OpCounter | None = None) -> SemidualClipper2D:
    """Preprocess a polygon into (k, q) and (m, p) grids of Active Edge Lists."""
    if min(n_k, n_q, n_m, n_p) < 1:
        raise ValueError("subdivision counts must be >= 1")
    needed = (n_k * n_q + n_m * n_p) * polygon.n
    if needed > max_entries:
        raise SubdivisionTooFine(needed, max_entries)
    started = time.perf_counter()
    ops = OpCounter()
    box = bounding_box(polygon)
    h = rhomb_bound(polygon.vertices, box.center)
    centered = polygon.vertices - np.asarray(box.center)
    ops.add(assigns=2 * polygon.n + 1, addsubs=4 * polygon.n, compares=6 * polygon.n)
    tol = eps_geom(polygon.diameter)
    grid_kq = _build_grid(centered, Branch.KQ, n_k, n_q, h, tol, ops)
    grid_mp = _build_grid(centered, Branch.MP, n_m, n_p, h, tol, ops)
    if counter is not None:
        counter += ops
    return SemidualClipper2D(polygon, box, h, grid_kq, grid_mp,
                             time.perf_counter() - started, ops)


def clip_o1_2d(clipper: SemidualClipper2D, seg: Segment, counter: OpCounter | None = None,
               audit: bool = False, trace: dict | None = None) -> ClipResult:
    """Clip a segment using only the edges listed for its line's grid cell.

    With ``audit`` every polygon edge is also checked and a crossed edge that
    is missing from the cell raises :class:`AELNotConservative`.  ``trace``,
    if given, receives the located cell and the number of edge tests.
    """
    cx, cy = clipper.center
    x0 = seg.p0[0] - cx
    y0 = seg.p0[1] - cy
    dx = seg.p1[0] - seg.p0[0]
    dy = seg.p1[1] - seg.p0[1]
    asg, cmp_, add, mul, div = 4, 1, 4, 0, 0
    if abs(dy) <= abs(dx):
        slope = dy / dx
        rep = LineRep(Branch.KQ, slope, y0 - slope * x0)
    else:
        slope = dx / dy
        rep = LineRep(Branch.MP, slope, x0 - slope * y0)
    asg += 2
    add += 1
    mul += 1
    div += 1
    grid = clipper.grid(rep.branch)
    cell = locate_cell(grid, rep)
    cmp_ += 1
    if trace is not None:
        trace["cell"] = cell
        trace["tests"] = 0
    if cell is None:
        _tally(counter, asg, cmp_, add, mul, div)
        if audit:
            _audit(clipper, rep, ())
        return ClipResult.empty()
    asg += 4
    add += 3
    mul += 3
    cmp_ += 2
    ael = grid._rows[cell[0] * grid.n_slope + cell[1]]
    if audit:
        _audit(clipper, rep, ael)

    dlen = math.hypot(dx, dy)
    par = PARALLEL_TOL * dlen
    rows = clipper._edge_rows
    t_in = t_out = None
    t_lo = t_hi = None
    asg += 3
    mul += 3
    add += 1
    for e in ael:
        ax, ay, nx, ny, nn = rows[e]
        wx = x0 - ax
        wy = y0 - ay
        num = nx * wx + ny * wy
        den = nx * dx + ny * dy
        asg += 4
        add += 4
        mul += 5
        cmp_ += 1
        if abs(den) <= par * nn:
            continue
        s = (wy * dx - wx * dy) / den
        asg += 1
        add += 1
        mul += 2
        div += 1
        cmp_ += 2
        if s < -PARAM_TOL or s > 1.0 + PARAM_TOL:
            continue
        t = -num / den
        asg += 1
        add += 1
        div += 1
        cmp_ += 4
        if t_lo is None or t < t_lo:
            t_lo = t
        if t_hi is None or t > t_hi:
            t_hi = t
        if den < 0.0:
            if t_in is None or t > t_in:
                t_in = t
                asg += 1
        elif t_out is None or t < t_out:
            t_out = t
            asg += 1
    if trace is not None:
        trace["tests"] = len(ael)
    cmp_ += 3
    _tally(counter, asg, cmp_, add, mul, div)
    if t_lo is None:
        return ClipResult.empty()
    return finish_interval(t_lo if t_in is None else t_in, t_hi if t_out is None else t_out)


def _tally(counter, *counts):
    if counter is not None:
        counter.add(*counts)


def _audit(clipper, rep: LineRep, ael):
    d, c = branch_frame(clipper.centered, rep.branch)
    r = c - rep.slope * d - rep.intercept
    crossed = np.nonzero(r * np.roll(r, -1) <= 0.0)[0]
    missing = set(crossed.tolist()) - set(ael)
    if missing:
        raise AELNotConservative(f"edges {sorted(missing)} crossed by {rep} but not in the cell's AEL")


def semidual_batch(p0c: np.ndarray, d: np.ndarray):
    """Branch mask, slope and intercept for many centred 2D lines."""
    kq = np.abs(d[:, 1]) <= np.abs(d[:, 0])
    u = np.where(kq, d[:, 0], d[:, 1])
    v = np.where(kq, d[:, 1], d[:, 0])
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = v / u
    x = np.where(kq, p0c[:, 0], p0c[:, 1])
    y = np.where(kq, p0c[:, 1], p0c[:, 0])
    return kq, slope, y - slope * x


def clip_o1_2d_batch(clipper: SemidualClipper2D, p0, p1):
    """Vectorised :func:`clip_o1_2d`; returns ``(t_enter, t_exit)``, NaN if empty."""
    p0 = np.asarray(p0, float)
    p1 = np.asarray(p1, float)
    d = p1 - p0
    p0c = p0 - np.asarray(clipper.center)
    kq, slope, intercept = semidual_batch(p0c, d)
    cells = np.where(kq, locate_cells(clipper.grid_kq, slope, intercept),
                     locate_cells(clipper.grid_mp, slope, intercept))

    a = clipper.centered
    e = np.roll(a, -1, axis=0) - a
    n = np.column_stack([e[:, 1], -e[:, 0]])
    nn = np.hypot(n[:, 0], n[:, 1])
    dlen = np.hypot(d[:, 0], d[:, 1])

    t_in = np.full(len(p0), np.nan)
    t_out = np.full(len(p0), np.nan)
    for grid, mask in ((clipper.grid_kq, kq), (clipper.grid_mp, ~kq)):
        rows = np.nonzero(mask & (cells >= 0))[0]
        if len(rows) == 0:
            continue
        ael = grid.padded[cells[rows]]  # (m, L)
        valid = ael >= 0
        idx = np.where(valid, ael, 0)
        ax, ay, nx, ny = a[idx, 0], a[idx, 1], n[idx, 0], n[idx, 1]
        x0, y0 = p0c[rows, 0:1], p0c[rows, 1:2]
        dx, dy = d[rows, 0:1], d[rows, 1:2]
        wx = x0 - ax
        wy = y0 - ay
        num = nx * wx + ny * wy
        den = nx * dx + ny * dy
        valid &= ~(np.abs(den) <= (PARALLEL_TOL * dlen[rows])[:, None] * nn[idx])
        with np.errstate(divide="ignore", invalid="ignore"):
            s = (wy * dx - wx * dy) / den
            t = -num / den
        valid &= ~((s < -PARAM_TOL) | (s > 1.0 + PARAM_TOL))
        entering = valid & (den < 0.0)
        leaving = valid & ~(den < 0.0)
        any_hit = valid.any(axis=1)
        lo_all = np.min(np.where(valid, t, np.inf), axis=1)
        hi_all = np.max(np.where(valid, t, -np.inf), axis=1)
        enter = np.where(entering.any(axis=1), np.max(np.where(entering, t, -np.inf), axis=1), lo_all)
        leave = np.where(leaving.any(axis=1), np.min(np.where(leaving, t, np.inf), axis=1), hi_all)
        t_in[rows] = np.where(any_hit, enter, np.nan)
        t_out[rows] = np.where(any_hit, leave, np.nan)
    miss = np.isnan(t_in)
    lo, hi = finish_interval_batch(np.where(miss, 1.0, t_in), np.where(miss, 0.0, t_out))
    return lo, hi


def ael_statistics(clipper: SemidualClipper2D) -> dict:
    """Exact AEL length statistics over all cells of both grids."""
    out = {"build_seconds": clipper.build_seconds, "build_ops": clipper.build_ops.as_tuple()}
    for name, grid in (("kq", clipper.grid_kq), ("mp", clipper.grid_mp)):
        lengths = np.diff(grid.offsets)
        out[name] = {
            "n_slope": grid.n_slope,
            "n_intercept": grid.n_intercept,
            "mean": float(lengths.mean()),
            "max": int(lengths.max()),
            "histogram": np.bincount(lengths, minlength=clipper.polygon.n + 1).tolist(),
        }
    return out

"""Geometric value types and the semidual line conversion shared by all clippers."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence, Tuple

import numpy as np

Point2 = Tuple[float, float]
Point3 = Tuple[float, float, float]

# Relative tolerance on edge/barycentric parameters when accepting a crossing.
PARAM_TOL = 1e-9
# Slack on t_enter > t_exit before a result is declared empty.
T_TOL = 1e-10
# |cos| between direction and normal below which a line counts as parallel.
PARALLEL_TOL = 1e-9


def eps_geom(diameter: float) -> float:
    """Absolute tolerance for containment and side tests at a given scale."""
    return 1e-9 * (1.0 + diameter)


class Branch(enum.Enum):
    KQ = "KQ"  # y = k x + q, |k| <= 1
    MP = "MP"  # x = m y + p, |m| <= 1


class Plane(enum.Enum):
    XY = 0
    XZ = 1
    YZ = 2

    @property
    def axes(self) -> Tuple[int, int]:
        return _PLANE_AXES[self]

    def grid_number(self, branch: Branch) -> int:
        """Numbering of the six semidual grids: odd is (k,q), even is (m,p)."""
        i = self.value + 1
        return 2 * i - 1 if branch is Branch.KQ else 2 * i


_PLANE_AXES = {Plane.XY: (0, 1), Plane.XZ: (0, 2), Plane.YZ: (1, 2)}


@dataclass(frozen=True)
class LineRep:
    branch: Branch
    slope: float
    intercept: float

    def __post_init__(self):
        if abs(self.slope) > 1.0:
            raise ValueError(f"semidual slope out of range: {self.slope}")
        if not math.isfinite(self.intercept):
            raise ValueError("intercept must be finite")

    def residual(self, x: float, y: float) -> float:
        """Signed offset of (x, y) from the line along the branch's ordinate."""
        if self.branch is Branch.KQ:
            return y - self.slope * x - self.intercept
        return x - self.slope * y - self.intercept


def to_semidual(p0: Sequence[float], p1: Sequence[float]) -> LineRep:
    """Semidual coordinates of the line through two distinct 2D points.

    Lines with ``|dy| <= |dx|`` go to the (k, q) branch, steeper ones to (m, p).
    """
    x0, y0 = float(p0[0]), float(p0[1])
    dx = float(p1[0]) - x0
    dy = float(p1[1]) - y0
    if dx == 0.0 and dy == 0.0:
        raise ValueError("zero-length segment")
    if abs(dy) <= abs(dx):
        k = dy / dx
        return LineRep(Branch.KQ, k, y0 - k * x0)
    m = dx / dy
    return LineRep(Branch.MP, m, x0 - m * y0)


def project_point(p: Sequence[float], plane: Plane) -> Point2:
    a, b = plane.axes
    return (float(p[a]), float(p[b]))


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Segment:
    """Parametric segment p(t) = p0 + t (p1 - p0), t in [0, 1], in 2D or 3D."""

    p0: Tuple[float, ...]
    p1: Tuple[float, ...]

    def __post_init__(self):
        p0 = tuple(float(v) for v in self.p0)
        p1 = tuple(float(v) for v in self.p1)
        if len(p0) != len(p1) or len(p0) not in (2, 3):
            raise ValueError("segment endpoints must both be 2D or both 3D")
        if p0 == p1:
            raise ValueError("zero-length segment")
        object.__setattr__(self, "p0", p0)
        object.__setattr__(self, "p1", p1)

    @property
    def dim(self) -> int:
        return len(self.p0)

    @property
    def direction(self) -> Tuple[float, ...]:
        return tuple(b - a for a, b in zip(self.p0, self.p1))

    def point_at(self, t: float) -> Tuple[float, ...]:
        return tuple(a + t * (b - a) for a, b in zip(self.p0, self.p1))


Segment2 = Segment
Segment3 = Segment


class ClipKind(enum.Enum):
    EMPTY = "empty"
    INTERVAL = "interval"


@dataclass(frozen=True)
class ClipResult:
    kind: ClipKind
    t_enter: float = math.nan
    t_exit: float = math.nan

    @classmethod
    def empty(cls) -> "ClipResult":
        return cls(ClipKind.EMPTY)

    @classmethod
    def interval(cls, t_enter: float, t_exit: float) -> "ClipResult":
        if not 0.0 <= t_enter <= t_exit <= 1.0:
            raise ValueError(f"invalid clip interval [{t_enter}, {t_exit}]")
        return cls(ClipKind.INTERVAL, t_enter, t_exit)

    @property
    def is_empty(self) -> bool:
        return self.kind is ClipKind.EMPTY

    def endpoints(self, seg: Segment):
        if self.is_empty:
            return None
        return seg.point_at(self.t_enter), seg.point_at(self.t_exit)


def finish_interval(t_enter: float, t_exit: float) -> ClipResult:
    """Intersect a carrier-line interval with [0, 1]."""
    lo = max(t_enter, 0.0)
    hi = min(t_exit, 1.0)
    if lo > hi + T_TOL or lo > 1.0 or hi < 0.0:
        return ClipResult.empty()
    return ClipResult.interval(lo, max(lo, hi))


def finish_interval_batch(t_enter: np.ndarray, t_exit: np.ndarray):
    """Vectorised :func:`finish_interval`; empty rows come back as NaN."""
    lo = np.maximum(t_enter, 0.0)
    hi = np.minimum(t_exit, 1.0)
    empty = ~(lo <= hi + T_TOL) | (lo > 1.0) | (hi < 0.0)
    hi = np.maximum(lo, hi)
    lo = np.where(empty, np.nan, lo)
    hi = np.where(empty, np.nan, hi)
    return lo, hi


@dataclass(frozen=True, eq=False)
class ConvexPolygon:
    """Strictly convex polygon with counter-clockwise vertices."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise ValueError("polygon needs at least 3 two-dimensional vertices")
        if not np.all(np.isfinite(v)):
            raise ValueError("polygon vertices must be finite")
        e = np.roll(v, -1, axis=0) - v
        if np.any(np.all(e == 0.0, axis=1)):
            raise ValueError("polygon has repeated vertices")
        cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
        if not np.all(cross > 0.0):
            raise ValueError("polygon must be strictly convex and counter-clockwise")
        # a winding number above one passes the local test but is not simple
        turn = np.arctan2(cross, np.sum(e * np.roll(e, -1, axis=0), axis=1)).sum()
        if turn > 2 * np.pi + 1e-6:
            raise ValueError("polygon is self-overlapping")
        object.__setattr__(self, "vertices", _readonly(v))

    @property
    def n(self) -> int:
        return len(self.vertices)

    def edges(self) -> Tuple[np.ndarray, np.ndarray]:
        """Start points and end points of the N edges, edge i = (v_i, v_i+1)."""
        return self.vertices, np.roll(self.vertices, -1, axis=0)

    def outward_normals(self) -> np.ndarray:
        a, b = self.edges()
        e = b - a
        return np.column_stack([e[:, 1], -e[:, 0]])

    @property
    def diameter(self) -> float:
        lo, hi = self.vertices.min(axis=0), self.vertices.max(axis=0)
        return float(np.hypot(*(hi - lo)))

    @cached_property
    def edge_rows(self) -> list:
        """Per edge ``(ax, ay, ex, ey, nx, ny, |n|)`` as plain floats for scalar loops."""
        a, b = self.edges()
        e = b - a
        n = self.outward_normals()
        norm = np.hypot(n[:, 0], n[:, 1])
        return [tuple(float(x) for x in row) for row in np.column_stack([a, e, n, norm])]


def _facet_normals(vertices: np.ndarray, facets: np.ndarray) -> np.ndarray:
    a, b, c = (vertices[facets[:, i]] for i in range(3))
    n = np.cross(b - a, c - a)
    length = np.linalg.norm(n, axis=1)
    if np.any(length == 0.0):
        raise ValueError("degenerate facet")
    return n / length[:, None]


@dataclass(frozen=True, eq=False)
class ConvexPolyhedron:
    """Closed convex polyhedron with triangular facets, CCW seen from outside.

    Normals are derived from the winding and are always unit and outward.
    """

    vertices: np.ndarray
    facets: np.ndarray
    normals: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        f = np.array(self.facets, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3 or len(v) < 4:
            raise ValueError("polyhedron needs at least 4 three-dimensional vertices")
        if f.ndim != 2 or f.shape[1] != 3 or len(f) < 4:
            raise ValueError("polyhedron needs at least 4 triangular facets")
        if f.min() < 0 or f.max() >= len(v):
            raise ValueError("facet index out of range")
        if np.any((f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])):
            raise ValueError("degenerate facet")
        normals = _facet_normals(v, f)

        # each directed edge once, its reverse exactly once
        directed = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
        keys = directed[:, 0] * len(v) + directed[:, 1]
        rev = directed[:, 1] * len(v) + directed[:, 0]
        if len(np.unique(keys)) != len(keys) or not np.array_equal(np.sort(keys), np.sort(rev)):
            raise ValueError("surface is not closed and consistently oriented")
        n_edges = len(keys) // 2
        if len(v) - n_edges + len(f) != 2:
            raise ValueError("Euler relation V - E + F = 2 violated")

        diameter = float(np.linalg.norm(v.max(axis=0) - v.min(axis=0)))
        offsets = np.einsum("ij,ij->i", normals, v[f[:, 0]])
        side = v @ normals.T - offsets[None, :]
        if np.any(side > eps_geom(diameter)):
            raise ValueError("polyhedron is not convex (or facets are not outward)")

        object.__setattr__(self, "vertices", _readonly(v))
        object.__setattr__(self, "facets", _readonly(f))
        object.__setattr__(self, "normals", _readonly(normals))

    @property
    def n(self) -> int:
        return len(self.facets)

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.vertices.max(axis=0) - self.vertices.min(axis=0)))

    @cached_property
    def facet_rows(self) -> list:
        """Per facet ``(v0, v1, v2, n)`` as float 3-tuples for scalar loops."""
        v = self.vertices
        return [
            tuple(tuple(float(x) for x in p) for p in (v[i], v[j], v[k], nrm))
            for (i, j, k), nrm in zip(self.facets, self.normals)
        ]


@dataclass(frozen=True)
class BoundingBox2:
    center: Point2
    half_x: float
    half_y: float

    def __post_init__(self):
        if not (self.half_x > 0 and self.half_y > 0):
            raise ValueError("bounding box half extents must be positive")

    @property
    def h(self) -> float:
        """Largest |intercept| of a slope-limited line that meets the box."""
        return self.half_x + self.half_y


def bounding_box(points) -> BoundingBox2:
    """Axis-aligned box of a polygon or of an (n, 2) point array."""
    v = points.vertices if isinstance(points, ConvexPolygon) else np.asarray(points, float)
    lo, hi = v.min(axis=0), v.max(axis=0)
    c = (lo + hi) / 2
    return BoundingBox2((float(c[0]), float(c[1])), float(hi[0] - c[0]), float(hi[1] - c[1]))


def rhomb_bound(points, center: Point2) -> float:
    """Smallest h with |x| + |y| <= h for all points, relative to ``center``.

    Any line with |slope| <= 1 through the convex hull of the points has
    |intercept| <= h in the centred frame, on either branch.
    """
    v = np.asarray(points, float) - np.asarray(center, float)
    return float(np.max(np.abs(v[:, 0]) + np.abs(v[:, 1])))

"""Constant-time line clipping against convex polygons and polyhedra.

Lines are mapped to a bounded dual ("semidual") space that is cut into a
uniform grid; each cell stores the edges or facets any of its lines can
cross, so a query looks at a fixed handful of candidates instead of all N.
"""
from .cyrus_beck import OpCounter, clip_cyrus_beck_2d, clip_cyrus_beck_3d
from .geometry import (BoundingBox2, Branch, ClipKind, ClipResult, ConvexPolygon, ConvexPolyhedron, LineRep,
                       Plane, Segment, bounding_box, to_semidual)
from .oracle import clip_halfspace_oracle
from .semidual2d import SemidualClipper2D, build_clipper_2d, clip_o1_2d, recommend_subdivision
from .semidual3d import FacetBitmap, SemidualClipper3D, build_clipper_3d, clip_o1_3d
from .cost import CostModel, theoretical_efficiency, weighted_cost
from .workload import WorkloadSpec, gen_convex_polygon, gen_convex_polyhedron, gen_lines

__all__ = [
    "BoundingBox2", "Branch", "ClipKind", "ClipResult", "ConvexPolygon", "ConvexPolyhedron", "CostModel",
    "FacetBitmap", "LineRep", "OpCounter", "Plane", "Segment", "SemidualClipper2D", "SemidualClipper3D",
    "WorkloadSpec", "bounding_box", "build_clipper_2d", "build_clipper_3d", "clip_cyrus_beck_2d",
    "clip_cyrus_beck_3d", "clip_halfspace_oracle", "clip_o1_2d", "clip_o1_3d", "gen_convex_polygon",
    "gen_convex_polyhedron", "gen_lines", "recommend_subdivision", "theoretical_efficiency", "to_semidual",
    "weighted_cost",
]

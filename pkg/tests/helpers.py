"""Brute-force reference routines written independently of the package."""
import numpy as np


def orient(a, b, c):
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def line_crosses_segment(p, d, a, b, tol=0.0):
    """Does the infinite line p + t d meet the closed segment ab?"""
    q = (p[0] + d[0], p[1] + d[1])
    sa, sb = orient(p, q, a), orient(p, q, b)
    return sa * sb <= tol


def line_from_rep(branch, slope, intercept):
    """Point and direction of a semidual line in its own frame (x, y)."""
    if branch == "KQ":
        return (0.0, intercept), (1.0, slope)
    return (intercept, 0.0), (slope, 1.0)


def moller_trumbore(orig, direction, v0, v1, v2, eps=1e-12):
    """Line-triangle intersection parameter (any t), None if parallel or outside."""
    e1 = np.subtract(v1, v0)
    e2 = np.subtract(v2, v0)
    pvec = np.cross(direction, e2)
    det = float(np.dot(e1, pvec))
    if abs(det) < eps:
        return None
    inv = 1.0 / det
    tvec = np.subtract(orig, v0)
    u = float(np.dot(tvec, pvec)) * inv
    if u < -1e-9 or u > 1 + 1e-9:
        return None
    qvec = np.cross(tvec, e1)
    v = float(np.dot(direction, qvec)) * inv
    if v < -1e-9 or u + v > 1 + 1e-9:
        return None
    return float(np.dot(e2, qvec)) * inv


def brute_clip_polyhedron(poly, p0, p1):
    """Clip via all line-triangle hits; (t_enter, t_exit) or None."""
    d = np.subtract(p1, p0)
    ts = [moller_trumbore(p0, d, *poly.vertices[f]) for f in poly.facets]
    ts = [t for t in ts if t is not None]
    if not ts:
        return None
    lo, hi = max(min(ts), 0.0), min(max(ts), 1.0)
    return (lo, hi) if lo <= hi + 1e-10 else None


def as_pairs(res):
    """Batch (t_enter, t_exit) arrays to a comparable form, NaN for empty."""
    return np.asarray(res[0], float), np.asarray(res[1], float)


def intervals_match(a, b, tol=1e-9):
    ea, eb = np.isnan(a[0]), np.isnan(b[0])
    if not np.array_equal(ea, eb):
        return False
    k = ~ea
    return bool(np.all(np.abs(a[0][k] - b[0][k]) <= tol) and np.all(np.abs(a[1][k] - b[1][k]) <= tol))


def result_pair(r):
    return (np.nan, np.nan) if r.is_empty else (r.t_enter, r.t_exit)


def triangle_hits(p0, d, tris):
    """(L, F) mask of lines p0 + t d meeting closed triangles, barycentric, no tolerance."""
    v0, v1, v2 = tris[:, 0], tris[:, 1], tris[:, 2]
    e1, e2 = v1 - v0, v2 - v0
    pvec = np.cross(d[:, None, :], e2[None])
    det = np.einsum("fk,lfk->lf", e1, pvec)
    tvec = p0[:, None, :] - v0[None]
    qvec = np.cross(tvec, e1[None])
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.einsum("lfk,lfk->lf", tvec, pvec) / det
        v = np.einsum("lk,lfk->lf", d, qvec) / det
    return (det != 0) & (u >= 0) & (v >= 0) & (u + v <= 1)


ACCEPTANCE_LINES = []


def report(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok

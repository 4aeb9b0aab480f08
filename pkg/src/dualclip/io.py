"""Region, line and result files, and the versioned clipper container.

Regions are JSON (``{"vertices": ..., "facets": ...}``), lines and results
are CSV with a header row.  A built clipper is stored as JSON with its grid
payloads base64-encoded little-endian arrays, so a reload is bit-exact.
"""
from __future__ import annotations

import base64
import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .cyrus_beck import OpCounter
from .geometry import Branch, ConvexPolygon, ConvexPolyhedron, Plane, bounding_box
from .semidual2d import SemidualClipper2D, SemidualGrid
from .semidual3d import BitmapGrid, PlaneGrids, SemidualClipper3D

CLIPPER_FORMAT = "dualclip.clipper"
CLIPPER_VERSION = 1


class FormatError(ValueError):
    """Malformed or unsupported input file."""


def _load_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def region_to_dict(region) -> dict:
    out = {"vertices": region.vertices.tolist()}
    if isinstance(region, ConvexPolyhedron):
        out["facets"] = region.facets.tolist()
    return out


def region_from_dict(data, where="region"):
    if not isinstance(data, dict) or "vertices" not in data:
        raise FormatError(f"{where}: expected an object with a 'vertices' array")
    try:
        verts = np.array(data["vertices"], dtype=float)
        if "facets" in data:
            return ConvexPolyhedron(verts, np.array(data["facets"], dtype=np.int64))
        return ConvexPolygon(verts)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{where}: {exc}") from None


def save_region(region, path):
    Path(path).write_text(json.dumps(region_to_dict(region)) + "\n")


def load_region(path):
    return region_from_dict(_load_json(path), str(path))


def _header(dim):
    axes = "xyz"[:dim]
    return [f"{a}0" for a in axes] + [f"{a}1" for a in axes]


def write_lines(lines: np.ndarray, path):
    lines = np.asarray(lines, float)
    dim = lines.shape[2] if lines.ndim == 3 else 2
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_header(dim))
        for p0, p1 in lines:
            w.writerow([repr(float(v)) for v in (*p0, *p1)])


def read_lines(path, dim=None) -> np.ndarray:
    """(M, 2, dim) endpoints; the dimension comes from the header."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise FormatError(f"{path}: missing header")
    header = [c.strip() for c in rows[0]]
    found = {4: 2, 6: 3}.get(len(header))
    if found is None or header != _header(found):
        raise FormatError(f"{path}: line 1: expected header {','.join(_header(dim or 2))}")
    if dim is not None and dim != found:
        raise FormatError(f"{path}: line 1: {found}D lines given for a {dim}D region")
    out = np.empty((len(rows) - 1, 2, found))
    for k, row in enumerate(rows[1:]):
        if len(row) != 2 * found:
            raise FormatError(f"{path}: line {k + 2}: expected {2 * found} fields, got {len(row)}")
        for pos, field in enumerate(row):
            try:
                v = float(field)
            except ValueError:
                raise FormatError(f"{path}: line {k + 2}, field {pos + 1}: not a number: {field!r}") from None
            if not math.isfinite(v):
                raise FormatError(f"{path}: line {k + 2}, field {pos + 1}: not finite")
            out[k, pos // found, pos % found] = v
        if np.array_equal(out[k, 0], out[k, 1]):
            raise FormatError(f"{path}: line {k + 2}: zero-length segment")
    return out


def fmt(v: float) -> str:
    """Six significant digits, '.' decimal separator."""
    return format(float(v), ".6g")


def results_rows(lines: np.ndarray, t_enter: np.ndarray, t_exit: np.ndarray):
    dim = lines.shape[2]
    axes = "xyz"[:dim]
    header = ["index", "status", "t_enter", "t_exit"] + [f"e{a}0" for a in axes] + [f"e{a}1" for a in axes]
    rows = []
    for i, (seg, a, b) in enumerate(zip(lines, t_enter, t_exit)):
        if np.isnan(a):
            rows.append([str(i), "empty"] + [""] * (2 + 2 * dim))
            continue
        p0, d = seg[0], seg[1] - seg[0]
        # snap values that are zero up to rounding so that the sign is stable
        tiny = 1e-12 * (1.0 + float(np.abs(seg).max()))
        ends = [p0 + a * d, p0 + b * d]
        vals = [a, b] + [v for e in ends for v in e]
        rows.append([str(i), "interval"] + [fmt(0.0 if abs(v) <= tiny else v) for v in vals])
    return header, rows


def write_results(lines, t_enter, t_exit, path):
    header, rows = results_rows(np.asarray(lines, float).reshape(-1, 2, np.shape(lines)[-1]), t_enter, t_exit)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _b64(a: np.ndarray, dtype: str) -> str:
    return base64.b64encode(np.ascontiguousarray(a, dtype=dtype).tobytes()).decode("ascii")


def _unb64(s: str, dtype: str) -> np.ndarray:
    return np.frombuffer(base64.b64decode(s.encode("ascii")), dtype=dtype).copy()


def clipper_to_dict(clipper) -> dict:
    if isinstance(clipper, SemidualClipper2D):
        grids = [
            {"branch": g.branch.value, "n_slope": g.n_slope, "n_intercept": g.n_intercept, "h": g.h,
             "offsets": _b64(g.offsets, "<i8"), "indices": _b64(g.indices, "<i4")}
            for g in (clipper.grid_kq, clipper.grid_mp)
        ]
        body = {"dimension": 2, "region": region_to_dict(clipper.polygon), "h": clipper.h, "grids": grids}
    else:
        planes = []
        for plane, pg in clipper.planes.items():
            planes.append({
                "plane": plane.name, "h": pg.h,
                "grids": [{"branch": g.branch.value, "n_slope": g.n_slope, "n_intercept": g.n_intercept,
                           "n_words": int(g.words.shape[1]), "words": _b64(g.words, "<u8")}
                          for g in (pg.kq, pg.mp)],
            })
        body = {"dimension": 3, "region": region_to_dict(clipper.poly), "planes": planes}
    return {"format": CLIPPER_FORMAT, "version": CLIPPER_VERSION, "build_ops": list(clipper.build_ops.as_tuple()),
            **body}


def clipper_from_dict(data, where="clipper"):
    if not isinstance(data, dict) or data.get("format") != CLIPPER_FORMAT:
        raise FormatError(f"{where}: not a serialized clipper")
    if data.get("version") != CLIPPER_VERSION:
        raise FormatError(f"{where}: unknown clipper format version {data.get('version')!r}")
    try:
        region = region_from_dict(data["region"], where)
        ops = OpCounter(*data.get("build_ops", [0] * 5))
        if data["dimension"] == 2:
            grids = []
            for g in data["grids"]:
                grids.append(SemidualGrid(Branch(g["branch"]), int(g["n_slope"]), int(g["n_intercept"]),
                                          float(g["h"]), _unb64(g["offsets"], "<i8").astype(np.int64),
                                          _unb64(g["indices"], "<i4").astype(np.int64)))
                if len(grids[-1].offsets) != grids[-1].n_cells + 1:
                    raise FormatError(f"{where}: grid payload does not match its dimensions")
            return SemidualClipper2D(region, bounding_box(region), float(data["h"]), grids[0], grids[1], 0.0, ops)
        planes = {}
        for p in data["planes"]:
            plane = Plane[p["plane"]]
            proj = region.vertices[:, list(plane.axes)]
            grids = []
            for g in p["grids"]:
                words = _unb64(g["words"], "<u8").reshape(-1, int(g["n_words"]))
                grid = BitmapGrid(Branch(g["branch"]), int(g["n_slope"]), int(g["n_intercept"]), float(p["h"]),
                                  words, region.n)
                if len(words) != grid.n_cells:
                    raise FormatError(f"{where}: grid payload does not match its dimensions")
                grids.append(grid)
            planes[plane] = PlaneGrids(plane, bounding_box(proj), float(p["h"]), grids[0], grids[1])
        return SemidualClipper3D(region, planes, 0.0, ops)
    except (KeyError, TypeError) as exc:
        raise FormatError(f"{where}: missing or malformed field {exc}") from None


def save_clipper(clipper, path):
    Path(path).write_text(json.dumps(clipper_to_dict(clipper), sort_keys=True) + "\n")


def load_clipper(path):
    return clipper_from_dict(_load_json(path), str(path))


def dumps_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()

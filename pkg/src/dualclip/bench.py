"""Preprocessing / processing trade-off sweeps in weighted operation units.

Every sweep point builds a seeded region and line set, runs the instrumented
Cyrus-Beck and O(1) clippers over all lines, checks both against the oracle
and reports total costs with the efficiency ratios

    v1 = cb_cost / o1_cost        v2 = cb_cost / (o1_cost + prep_cost)
"""
from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from .cost import DEFAULT_MODEL, CostModel, weighted_cost
from .cyrus_beck import OpCounter, clip_cyrus_beck_2d, clip_cyrus_beck_3d
from .geometry import Segment
from .io import dumps_csv, fmt
from .oracle import oracle_clip_batch
from .semidual2d import ael_statistics, build_clipper_2d, clip_o1_2d
from .semidual3d import afl_statistics, build_clipper_3d, clip_o1_3d
from .workload import gen_convex_polygon, gen_convex_polyhedron, gen_lines

E2_COLUMNS = ["N", "M", "Pr", "n_k", "n_q", "n_m", "n_p", "prep_cost", "cb_cost", "o1_cost", "v1", "v2",
              "ael_mean_kq", "ael_mean_mp", "ael_max"]
E3_COLUMNS = ["N", "M", "Pr", "n_k", "n_q", "n_m", "n_p", "prep_cost", "cb_cost", "o1_cost", "v1", "v2",
              "afl_mean_before", "afl_mean_after", "detail_tests_mean"]
WALL_COLUMNS = ["prep_seconds", "cb_seconds", "o1_seconds"]


class AlgorithmsDisagree(RuntimeError):
    def __init__(self, message, region=None, segment=None):
        super().__init__(message)
        self.region = region
        self.segment = segment


def sub_seed(seed: int, *parts) -> int:
    """Deterministic child seed for one sweep point."""
    words = [int(seed)] + [int(round(float(p) * 1000)) for p in parts]
    return int(np.random.SeedSequence(words).generate_state(1, dtype=np.uint64)[0] >> 1)


@dataclass
class BenchReport:
    columns: List[str]
    rows: List[dict] = field(default_factory=list)

    def add(self, row: dict):
        self.rows.append(row)

    def check(self):
        for row in self.rows:
            if row["v1"] != row["cb_cost"] / row["o1_cost"]:
                raise AssertionError(f"v1 identity violated in {row}")
            if row["v2"] != row["cb_cost"] / (row["o1_cost"] + row["prep_cost"]):
                raise AssertionError(f"v2 identity violated in {row}")

    def _cells(self, row):
        return [str(v) if isinstance(v, (int, np.integer)) else fmt(v) for v in (row[c] for c in self.columns)]

    def to_csv(self) -> str:
        self.check()
        return dumps_csv(self.columns, [self._cells(r) for r in self.rows])

    def to_json(self) -> str:
        self.check()
        return json.dumps([dict(zip(self.columns, self._cells(r))) for r in self.rows], indent=1) + "\n"


def _agree(a, b, tol=1e-9):
    ea, eb = np.isnan(a[0]), np.isnan(b[0])
    both = ~ea & ~eb
    ok = ea == eb
    ok[both] = (np.abs(a[0] - b[0]) <= tol)[both] & (np.abs(a[1] - b[1]) <= tol)[both]
    return ok


def _run(clip, lines):
    counter = OpCounter()
    t_in = np.full(len(lines), np.nan)
    t_out = np.full(len(lines), np.nan)
    started = time.perf_counter()
    for k, (p0, p1) in enumerate(lines):
        r = clip(Segment(p0, p1), counter)
        if not r.is_empty:
            t_in[k], t_out[k] = r.t_enter, r.t_exit
    return counter, (t_in, t_out), time.perf_counter() - started


def _differential(region, lines, results: dict):
    oracle = oracle_clip_batch(region, lines[:, 0], lines[:, 1])
    for name, res in results.items():
        ok = _agree(res, oracle)
        if not ok.all():
            k = int(np.argmin(ok))
            raise AlgorithmsDisagree(
                f"algorithms disagree: {name} gives [{res[0][k]}, {res[1][k]}], oracle gives "
                f"[{oracle[0][k]}, {oracle[1][k]}] for segment {lines[k].tolist()}",
                region, lines[k])


def _finish_row(row, prep, cb, o1, wall, model):
    row["prep_cost"] = weighted_cost(prep, model)
    row["cb_cost"] = weighted_cost(cb, model)
    row["o1_cost"] = weighted_cost(o1, model)
    row["v1"] = row["cb_cost"] / row["o1_cost"]
    row["v2"] = row["cb_cost"] / (row["o1_cost"] + row["prep_cost"])
    row.update(zip(WALL_COLUMNS, wall))
    return row


def bench_point_e2(n, m, pr, n_k, n_q, n_m, n_p, seed, model: CostModel = DEFAULT_MODEL) -> dict:
    polygon = gen_convex_polygon(n, sub_seed(seed, n))
    lines = gen_lines(polygon, m, pr, sub_seed(seed, n, m, pr))
    prep = OpCounter()
    started = time.perf_counter()
    clipper = build_clipper_2d(polygon, n_k, n_q, n_m, n_p, counter=prep)
    prep_s = time.perf_counter() - started
    cb, cb_res, cb_s = _run(lambda s, c: clip_cyrus_beck_2d(polygon, s, c), lines)
    o1, o1_res, o1_s = _run(lambda s, c: clip_o1_2d(clipper, s, c), lines)
    _differential(polygon, lines, {"cb": cb_res, "o1": o1_res})
    stats = ael_statistics(clipper)
    row = {"N": n, "M": m, "Pr": pr, "n_k": n_k, "n_q": n_q, "n_m": n_m, "n_p": n_p,
           "ael_mean_kq": stats["kq"]["mean"], "ael_mean_mp": stats["mp"]["mean"],
           "ael_max": max(stats["kq"]["max"], stats["mp"]["max"])}
    return _finish_row(row, prep, cb, o1, (prep_s, cb_s, o1_s), model)


def bench_point_e3(n, m, pr, n_k, n_q, n_m, n_p, seed, model: CostModel = DEFAULT_MODEL) -> dict:
    poly = gen_convex_polyhedron(n, sub_seed(seed, n))
    lines = gen_lines(poly, m, pr, sub_seed(seed, n, m, pr))
    prep = OpCounter()
    started = time.perf_counter()
    clipper = build_clipper_3d(poly, n_k, n_q, n_m, n_p, counter=prep)
    prep_s = time.perf_counter() - started
    cb, cb_res, cb_s = _run(lambda s, c: clip_cyrus_beck_3d(poly, s, c), lines)
    tests = []

    def o1_clip(s, c):
        trace = {}
        r = clip_o1_3d(clipper, s, c, trace=trace)
        tests.append(trace["tests"])
        return r

    o1, o1_res, o1_s = _run(o1_clip, lines)
    _differential(poly, lines, {"cb": cb_res, "o1": o1_res})
    hit = ~np.isnan(o1_res[0])
    stats = afl_statistics(clipper, lines[hit, 0], lines[hit, 1]) if hit.any() else {}
    row = {"N": n, "M": m, "Pr": pr, "n_k": n_k, "n_q": n_q, "n_m": n_m, "n_p": n_p,
           "afl_mean_before": stats.get("mean_before", 0.0), "afl_mean_after": stats.get("mean_after", 0.0),
           "detail_tests_mean": float(np.mean(tests))}
    return _finish_row(row, prep, cb, o1, (prep_s, cb_s, o1_s), model)


def sweep(dimension: int, ns: Sequence[int], ms: Sequence[int], prs: Sequence[float], nks: Sequence[int],
          nqs: Sequence[int], nms: Sequence[int] | None = None, nps: Sequence[int] | None = None, seed: int = 0,
          wallclock: bool = False, model: CostModel = DEFAULT_MODEL) -> BenchReport:
    """Cartesian sweep; (m, p) subdivisions default to the (k, q) ones."""
    point = bench_point_e2 if dimension == 2 else bench_point_e3
    columns = (E2_COLUMNS if dimension == 2 else E3_COLUMNS) + (WALL_COLUMNS if wallclock else [])
    report = BenchReport(columns)
    for n, m, pr, nk, nq in itertools.product(ns, ms, prs, nks, nqs):
        nm_list = nms if nms is not None else [nk]
        np_list = nps if nps is not None else [nq]
        for nm, npp in itertools.product(nm_list, np_list):
            report.add(point(n, m, pr, nk, nq, nm, npp, seed, model))
    return report

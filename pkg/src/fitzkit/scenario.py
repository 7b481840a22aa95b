"""Scenario runner: parse a JSON config, run verification suites, emit reports.

A scenario declares objects (structural convex functions, linear operators,
grid-sampled functions), named box lattices, and a list of suites. Reports are
deterministic: probe generation is seeded, maps are ordered, floats are
written in shortest round-trip form, and +inf appears as the token "inf", so
two runs of one scenario file produce byte-identical artifacts.

Exit codes: 0 all suites pass, 2 any suite fails, 1 malformed input or an
enumeration cap trip.

Scenario schema (all keys required unless noted):

    {
      "name": str,
      "tol": positive number (optional, default 1e-9),
      "seed": int (optional, default 0),
      "objects": {name: objdef, ...},
      "lattices": {name: [{"lo": num, "hi": num, "count": int >= 2}, ...]},
      "suites": [suitedef, ...]
    }

objdef kinds:
    {"kind": "vkc", "K": [[...]], "V": [[...]], "C": [[...]],
     "xhat": [...], "xbar_star": [...], "c": num}
    {"kind": "linear", "matrix": [[...]], "points": [[...], ...]}
    {"kind": "grid", "axes": [axis, ...], "values": [num | "inf", ...]}

suitedef kinds (each also takes an optional "name"):
    {"kind": "field-dump", "object", "primal", "dual"}
    {"kind": "singleton", "object", "primal", "dual",
     "probes": [[[x],[xstar]],[[y],[ystar]]] pairs (optional),
     "random_probes": int (optional, default 32),
     "expect": "consistent" | "refuted" (optional, default "consistent")}
    {"kind": "gap", "object", "primal", "dual",
     "agree_tol": num (optional, default 1e-4),
     "max_gap": num (optional; asserts the gap field stays below it)}
    {"kind": "sandwich", "object", "w": [...], "vstar": [...], "primal", "dual"}
    {"kind": "monotonicity", "object",
     "checks": [{"n": int, "expect": bool}, ...],
     "cyclic_expect": bool (optional)}
    {"kind": "theorem-a", "object", "vstar": [...], "primal",
     "expect": "pass" | "fail-subgradient" (optional, default "pass")}
    {"kind": "theorem-b", "object", "primal", "dual",
     "eps": [num, ...], "grid_tol_factor": num (optional, default 2.0)}

Lattice roles: "primal" lattices live on E, "dual" lattices on E*; for vkc
and grid objects the operator graph is sampled from the subdifferential
(grid objects sample on their own axes), for linear objects from the stored
points.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .config import DEFAULT_TOL, thread_count
from .convexfn import (
    FieldGrid,
    GridAxis,
    GridSampled,
    InvalidVKCSpec,
    VKCSpec,
    conjugate_grid,
    conjugate_vkc,
    vkc_function,
)
from .fitzpatrick import (
    SAMPLED_GRAPH_ASSUMPTION,
    fitzpatrick_batch,
    gap_field,
    p_value,
    sandwich_test,
    singleton_criterion_vkc,
    singleton_test,
)
from .geometry import DimensionMismatch, PolyhedralCone, Polytope
from .linprog import LPFailure
from .monotonicity import CapExceeded, is_cyclically_monotone, is_n_monotone, theorem_a_suite
from .operators import LinearOperator, OperatorGraph, lattice_points, linear_graph, sample_subdifferential

__all__ = ["ScenarioError", "Scenario", "load_scenario", "run_scenario", "generate_builtin", "builtin_names"]


class ScenarioError(ValueError):
    """Malformed scenario input; the message names the offending key."""


def _fail(path: str, msg: str):
    raise ScenarioError(f"{path}: {msg}")


def _need(data: dict, key: str, path: str):
    if key not in data:
        _fail(f"{path}.{key}", "missing required key")
    return data[key]


def _number(v, path: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(path, f"expected a number, got {type(v).__name__}")
    if not math.isfinite(v):
        _fail(path, "must be finite")
    return float(v)


def _vector(v, path: str) -> np.ndarray:
    if not isinstance(v, list) or not v:
        _fail(path, "expected a nonempty coordinate list")
    return np.array([_number(c, f"{path}[{i}]") for i, c in enumerate(v)])


def _matrix(v, path: str, allow_empty: bool = False) -> list:
    if not isinstance(v, list) or (not v and not allow_empty):
        _fail(path, "expected a list of coordinate lists")
    return [_vector(row, f"{path}[{i}]") for i, row in enumerate(v)]


def _axis(v, path: str) -> GridAxis:
    if not isinstance(v, dict):
        _fail(path, "expected an axis object {lo, hi, count}")
    lo = _number(_need(v, "lo", path), f"{path}.lo")
    hi = _number(_need(v, "hi", path), f"{path}.hi")
    count = _need(v, "count", path)
    if isinstance(count, bool) or not isinstance(count, int) or count < 2:
        _fail(f"{path}.count", "expected an integer >= 2")
    try:
        return GridAxis(lo, hi, count)
    except ValueError as exc:
        _fail(path, str(exc))


def _axes(v, path: str) -> tuple[GridAxis, ...]:
    if not isinstance(v, list) or not v:
        _fail(path, "expected a nonempty list of axes")
    return tuple(_axis(a, f"{path}[{i}]") for i, a in enumerate(v))


@dataclass
class _VKCObject:
    spec: VKCSpec

    @property
    def dim(self):
        return self.spec.dim


@dataclass
class _LinearObject:
    operator: LinearOperator
    points: np.ndarray

    @property
    def dim(self):
        return self.operator.dim


@dataclass
class _GridObject:
    fn: GridSampled

    @property
    def dim(self):
        return self.fn.dim


def _build_object(data: dict, path: str):
    kind = _need(data, "kind", path)
    if kind == "vkc":
        K = Polytope(np.array(_matrix(_need(data, "K", path), f"{path}.K")))
        V = Polytope(np.array(_matrix(_need(data, "V", path), f"{path}.V")))
        c_rows = _matrix(_need(data, "C", path), f"{path}.C", allow_empty=True)
        C = PolyhedralCone(np.array(c_rows).reshape(len(c_rows), K.dim) if c_rows else np.zeros((0, K.dim)))
        try:
            spec = VKCSpec(
                K=K,
                V=V,
                C=C,
                xhat=_vector(_need(data, "xhat", path), f"{path}.xhat"),
                xbar_star=_vector(_need(data, "xbar_star", path), f"{path}.xbar_star"),
                c=_number(data.get("c", 0.0), f"{path}.c"),
            )
        except (InvalidVKCSpec, DimensionMismatch, ValueError) as exc:
            _fail(path, f"invalid vkc spec: {exc}")
        return _VKCObject(spec)
    if kind == "linear":
        mat = np.array(_matrix(_need(data, "matrix", path), f"{path}.matrix"))
        pts = np.array(_matrix(_need(data, "points", path), f"{path}.points"))
        try:
            op = LinearOperator(mat)
        except ValueError as exc:
            _fail(f"{path}.matrix", str(exc))
        if pts.shape[1] != op.dim:
            _fail(f"{path}.points", "point dimension does not match the matrix")
        return _LinearObject(op, pts)
    if kind == "grid":
        axes = _axes(_need(data, "axes", path), f"{path}.axes")
        raw = _need(data, "values", path)
        if not isinstance(raw, list):
            _fail(f"{path}.values", "expected a list of numbers")
        vals = []
        for i, v in enumerate(raw):
            if v == "inf":
                vals.append(math.inf)
            else:
                vals.append(_number(v, f"{path}.values[{i}]"))
        try:
            return _GridObject(GridSampled(FieldGrid(axes, np.array(vals))))
        except ValueError as exc:
            _fail(f"{path}.values", str(exc))
    _fail(f"{path}.kind", f"unknown object kind {kind!r}")


@dataclass
class Scenario:
    name: str
    tol: float
    seed: int
    objects: dict
    lattices: dict
    suites: list
    raw: dict


_SUITE_KINDS = {"field-dump", "singleton", "gap", "sandwich", "monotonicity", "theorem-a", "theorem-b"}


def load_scenario(source) -> Scenario:
    """Parse and validate a scenario from a dict, a JSON string, or a path."""
    if isinstance(source, dict):
        raw = source
    else:
        text = source
        if isinstance(source, (str, os.PathLike)) and os.path.exists(source):
            with open(source, "r", encoding="utf-8") as fh:
                text = fh.read()
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"scenario: invalid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        _fail("scenario", "top level must be an object")

    name = _need(raw, "name", "scenario")
    if not isinstance(name, str) or not name:
        _fail("scenario.name", "expected a nonempty string")
    tol = _number(raw.get("tol", DEFAULT_TOL), "scenario.tol")
    if tol <= 0:
        _fail("scenario.tol", "must be positive")
    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        _fail("scenario.seed", "expected an integer")

    objects = {}
    objs = _need(raw, "objects", "scenario")
    if not isinstance(objs, dict) or not objs:
        _fail("scenario.objects", "expected a nonempty object map")
    for oname, od in objs.items():
        if not isinstance(od, dict):
            _fail(f"scenario.objects.{oname}", "expected an object definition")
        objects[oname] = _build_object(od, f"scenario.objects.{oname}")

    lattices = {}
    lats = raw.get("lattices", {})
    if not isinstance(lats, dict):
        _fail("scenario.lattices", "expected a map of lattice names")
    for lname, ld in lats.items():
        lattices[lname] = _axes(ld, f"scenario.lattices.{lname}")

    suites = _need(raw, "suites", "scenario")
    if not isinstance(suites, list) or not suites:
        _fail("scenario.suites", "expected a nonempty list")
    for i, s in enumerate(suites):
        path = f"scenario.suites[{i}]"
        if not isinstance(s, dict):
            _fail(path, "expected a suite object")
        kind = _need(s, "kind", path)
        if kind not in _SUITE_KINDS:
            _fail(f"{path}.kind", f"unknown suite kind {kind!r}")
        oname = _need(s, "object", path)
        if oname not in objects:
            _fail(f"{path}.object", f"references undeclared object {oname!r}")
        for lkey in ("primal", "dual"):
            if lkey in s:
                if s[lkey] not in lattices:
                    _fail(f"{path}.{lkey}", f"references undeclared lattice {s[lkey]!r}")
                dims = len(lattices[s[lkey]])
                if dims != objects[oname].dim:
                    _fail(f"{path}.{lkey}", f"lattice dimension {dims} does not match object dimension {objects[oname].dim}")
    return Scenario(name, tol, seed, objects, lattices, suites, raw)


# ---------------------------------------------------------------------------
# Graph and function assembly per object


def _object_graph(obj, scenario: Scenario, suite: dict, path: str) -> OperatorGraph:
    if isinstance(obj, _LinearObject):
        return linear_graph(obj.operator, obj.points)
    if isinstance(obj, _VKCObject):
        axes = scenario.lattices[_need(suite, "primal", path)]
        return sample_subdifferential(obj.spec, axes, tol=scenario.tol)
    if isinstance(obj, _GridObject):
        return sample_subdifferential(obj.fn, obj.fn.grid.axes, tol=scenario.tol)
    raise ScenarioError(f"{path}: unsupported object for graph sampling")


def _object_functions(obj, scenario: Scenario, suite: dict, path: str):
    """(f, f*) for function-backed objects; grid conjugates use the dual lattice."""
    if isinstance(obj, _VKCObject):
        return vkc_function(obj.spec), conjugate_vkc(obj.spec)
    if isinstance(obj, _GridObject):
        dual = scenario.lattices[_need(suite, "dual", path)]
        return obj.fn, conjugate_grid(obj.fn, dual)
    _fail(path, "suite needs a function-backed object (vkc or grid)")


# ---------------------------------------------------------------------------
# Suite runners (each returns pass flag, details dict, optional csv fields)


def _fmt(v: float) -> str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(float(v) + 0.0)


def _sanitize(obj):
    """JSON-ready deep copy: arrays to lists, inf to 'inf', -0.0 to 0.0."""
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v + 0.0
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _suite_field_dump(scenario, suite, obj, path):
    primal = scenario.lattices[_need(suite, "primal", path)]
    dual = scenario.lattices[_need(suite, "dual", path)]
    f, fstar = _object_functions(obj, scenario, suite, path)
    G = _object_graph(obj, scenario, suite, path)
    phi, fitz, gap, _ = gap_field(f, fstar, G, primal, dual)
    P = lattice_points(primal)
    D = lattice_points(dual)

    workers = thread_count()

    def p_row(t):
        return [p_value(G, P[t], D[s], tol=scenario.tol) for s in range(D.shape[0])]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            p_rows = list(pool.map(p_row, range(P.shape[0])))
    else:
        p_rows = [p_row(t) for t in range(P.shape[0])]

    d = G.dim
    header = [f"x{k}" for k in range(d)] + [f"xstar{k}" for k in range(d)] + ["F", "P", "Phi", "gap"]
    lines = [",".join(header)]
    for t in range(P.shape[0]):
        for s in range(D.shape[0]):
            row = [_fmt(v) for v in P[t]] + [_fmt(v) for v in D[s]]
            row += [_fmt(fitz[t, s]), _fmt(p_rows[t][s]), _fmt(phi[t, s]), _fmt(gap[t, s])]
            lines.append(",".join(row))
    csv_text = "\n".join(lines) + "\n"

    finite = np.isfinite(gap)
    details = {
        "cells": int(phi.size),
        "finite_gap_cells": int(finite.sum()),
        "max_finite_gap": float(gap[finite].max()) if finite.any() else None,
        "min_fitzpatrick": float(fitz.min()),
    }
    return True, details, {"field": csv_text}


def _trusted_random_probes(obj, scenario, suite, path, rng, n):
    """Seeded probe pairs on regions where the sampled F is exact."""
    probes = []
    if n <= 0:
        return probes
    if isinstance(obj, _LinearObject):
        pts = obj.points
        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        M = obj.operator.matrix
        for _ in range(n):
            z1 = lo + (hi - lo) * rng.random(obj.dim)
            z2 = lo + (hi - lo) * rng.random(obj.dim)
            probes.append(((z1, M @ z1), (z2, M @ z2)))
        return probes
    if isinstance(obj, _VKCObject):
        f = vkc_function(obj.spec)
        fstar = conjugate_vkc(obj.spec)
        P = lattice_points(scenario.lattices[_need(suite, "primal", path)])
        D = lattice_points(scenario.lattices[_need(suite, "dual", path)])
        pd = [x for x in P if math.isfinite(f(x))]
        dd = [s for s in D if math.isfinite(fstar(s))]
        if pd and dd:
            for _ in range(n):
                p1 = (pd[rng.integers(len(pd))], dd[rng.integers(len(dd))])
                p2 = (pd[rng.integers(len(pd))], dd[rng.integers(len(dd))])
                probes.append((p1, p2))
        return probes
    return probes  # grid objects: explicit probes only


def _suite_singleton(scenario, suite, obj, path):
    G = _object_graph(obj, scenario, suite, path)
    expect = suite.get("expect", "consistent")
    if expect not in ("consistent", "refuted"):
        _fail(f"{path}.expect", "must be 'consistent' or 'refuted'")
    probes = [(p, q) for p in G.pairs for q in G.pairs]
    n_graph = len(probes)
    for i, pr in enumerate(suite.get("probes", [])):
        ppath = f"{path}.probes[{i}]"
        if not isinstance(pr, list) or len(pr) != 2:
            _fail(ppath, "a probe is a pair [[x, xstar], [y, ystar]]")
        (x, xs), (y, ys) = pr
        probes.append(((_vector(x, ppath), _vector(xs, ppath)), (_vector(y, ppath), _vector(ys, ppath))))
    rng = np.random.default_rng(scenario.seed)
    probes += _trusted_random_probes(obj, scenario, suite, path, rng, suite.get("random_probes", 32))
    verdict = singleton_test(G, probes, tol=scenario.tol)
    passed = (verdict.verdict == "consistent-with-singleton") == (expect == "consistent")
    wp, wq = verdict.witness_pair
    details = {
        "verdict": verdict.verdict,
        "expect": expect,
        "min_residual": verdict.min_residual,
        "witness": [
            [np.asarray(wp.x if hasattr(wp, "x") else wp[0]), np.asarray(wp.xstar if hasattr(wp, "xstar") else wp[1])],
            [np.asarray(wq.x if hasattr(wq, "x") else wq[0]), np.asarray(wq.xstar if hasattr(wq, "xstar") else wq[1])],
        ],
        "graph_pairs": G.n_pairs,
        "probes": {"graph": n_graph, "explicit": len(suite.get("probes", [])), "random": suite.get("random_probes", 32)},
    }
    return passed, details, {}


def _suite_gap(scenario, suite, obj, path):
    primal = scenario.lattices[_need(suite, "primal", path)]
    dual = scenario.lattices[_need(suite, "dual", path)]
    f, fstar = _object_functions(obj, scenario, suite, path)
    G = _object_graph(obj, scenario, suite, path)
    phi, fitz, gap, direct = gap_field(f, fstar, G, primal, dual)
    agree_tol = _number(suite.get("agree_tol", 1e-4), f"{path}.agree_tol")

    both_finite = np.isfinite(gap) & np.isfinite(direct)
    flag_mismatch = int(np.sum(np.isfinite(gap) != np.isfinite(direct)))
    max_disagreement = float(np.abs(gap[both_finite] - direct[both_finite]).max()) if both_finite.any() else 0.0
    min_gap = float(gap[np.isfinite(gap)].min()) if np.isfinite(gap).any() else None
    neg_tol = 100.0 * scenario.tol
    passed = max_disagreement <= agree_tol and flag_mismatch == 0
    if min_gap is not None and min_gap < -neg_tol:
        passed = False
    details = {
        "probes": int(gap.size),
        "finite_probes": int(both_finite.sum()),
        "max_route_disagreement": max_disagreement,
        "agree_tol": agree_tol,
        "flag_mismatches": flag_mismatch,
        "min_gap": min_gap,
    }
    if "max_gap" in suite:
        cap = _number(suite["max_gap"], f"{path}.max_gap")
        max_gap = float(gap[both_finite].max()) if both_finite.any() else 0.0
        details["max_gap"] = max_gap
        details["max_gap_allowed"] = cap
        if max_gap > cap:
            passed = False
    return passed, details, {}


def _suite_sandwich(scenario, suite, obj, path):
    primal = scenario.lattices[_need(suite, "primal", path)]
    dual = scenario.lattices[_need(suite, "dual", path)]
    G = _object_graph(obj, scenario, suite, path)
    w = _vector(_need(suite, "w", path), f"{path}.w")
    vstar = _vector(_need(suite, "vstar", path), f"{path}.vstar")
    try:
        rep = sandwich_test(G, w, vstar, primal, dual, tol=scenario.tol)
    except ValueError as exc:
        _fail(path, str(exc))
    details = {
        "primal_chain_ok": rep.primal_chain_ok,
        "dual_chain_ok": rep.dual_chain_ok,
        "worst_slack": rep.worst_slack,
        "slack_tol": rep.slack_tol,
    }
    return rep.ok, details, {}


def _suite_monotonicity(scenario, suite, obj, path):
    G = _object_graph(obj, scenario, suite, path)
    results = []
    passed = True
    for i, chk in enumerate(suite.get("checks", [])):
        cpath = f"{path}.checks[{i}]"
        n = _need(chk, "n", cpath)
        expect = _need(chk, "expect", cpath)
        if not isinstance(n, int) or isinstance(n, bool) or n < 2:
            _fail(f"{cpath}.n", "expected an integer >= 2")
        if not isinstance(expect, bool):
            _fail(f"{cpath}.expect", "expected a boolean")
        ok, wit = is_n_monotone(G, n, tol=scenario.tol)
        entry = {"n": n, "monotone": ok, "expect": expect}
        if wit is not None:
            entry["witness"] = {"indices": list(wit.indices), "cycle_sum": wit.cycle_sum}
        results.append(entry)
        if ok != expect:
            passed = False
    cyc_entry = None
    if "cyclic_expect" in suite:
        expect = suite["cyclic_expect"]
        if not isinstance(expect, bool):
            _fail(f"{path}.cyclic_expect", "expected a boolean")
        ok, wit = is_cyclically_monotone(G, tol=scenario.tol)
        cyc_entry = {"monotone": ok, "expect": expect}
        if wit is not None:
            cyc_entry["witness"] = {"indices": list(wit.indices), "cycle_sum": wit.cycle_sum}
        if ok != expect:
            passed = False
    details = {"graph_pairs": G.n_pairs, "checks": results}
    if cyc_entry is not None:
        details["cyclic"] = cyc_entry
    return passed, details, {}


def _suite_theorem_a(scenario, suite, obj, path):
    primal = scenario.lattices[_need(suite, "primal", path)]
    G = _object_graph(obj, scenario, suite, path)
    vstar = _vector(_need(suite, "vstar", path), f"{path}.vstar")
    expect = suite.get("expect", "pass")
    if expect not in ("pass", "fail-subgradient"):
        _fail(f"{path}.expect", "must be 'pass' or 'fail-subgradient'")
    try:
        rep = theorem_a_suite(G, vstar, primal, tol=scenario.tol)
    except ValueError as exc:
        _fail(path, str(exc))
    outcome = "pass" if rep.passed else ("fail-subgradient" if rep.convexity_ok else "fail-convexity")
    details = {
        "convexity_ok": rep.convexity_ok,
        "subgradient_ok": rep.subgradient_ok,
        "worst_convexity_violation": rep.worst_convexity_violation,
        "worst_subgradient_violation": rep.worst_subgradient_violation,
        "n_failures": len(rep.failures),
        "outcome": outcome,
        "expect": expect,
    }
    return outcome == expect, details, {}


def _suite_theorem_b(scenario, suite, obj, path):
    if not isinstance(obj, _VKCObject):
        _fail(f"{path}.object", "theorem-b needs a vkc object")
    primal = scenario.lattices[_need(suite, "primal", path)]
    dual = scenario.lattices[_need(suite, "dual", path)]
    eps = suite.get("eps", [0.1, 0.01])
    if not isinstance(eps, list) or not eps:
        _fail(f"{path}.eps", "expected a nonempty list of positive numbers")
    eps = [_number(e, f"{path}.eps[{i}]") for i, e in enumerate(eps)]
    factor = _number(suite.get("grid_tol_factor", 2.0), f"{path}.grid_tol_factor")

    f = vkc_function(obj.spec)
    fstar = conjugate_vkc(obj.spec)
    grid_star = conjugate_grid(f, dual, primal_axes=primal)
    D = lattice_points(dual)
    exact = np.array([fstar(s) for s in D])
    approx = grid_star.grid.values.reshape(-1)
    step = max(a.step for a in primal)
    scale = 1.0 + float(np.max(np.abs(D)))
    modulus = step * scale
    both = np.isfinite(exact) & np.isfinite(approx)
    flag_mismatch = int(np.sum(np.isfinite(exact) != np.isfinite(approx)))
    max_err = float(np.abs(exact[both] - approx[both]).max()) if both.any() else 0.0
    conj_ok = max_err <= factor * modulus and flag_mismatch == 0

    crit = singleton_criterion_vkc(obj.spec, eps, primal, dual, tol=scenario.tol)
    details = {
        "conjugate_max_error": max_err,
        "conjugate_allowance": factor * modulus,
        "conjugate_flag_mismatches": flag_mismatch,
        "criterion_probes": crit.n_probes,
        "criterion_failures": len(crit.failures),
        "criterion_worst_residual": float(crit.min_residuals.max()) if crit.min_residuals.size else 0.0,
        "eps": eps,
    }
    return conj_ok and crit.passed, details, {}


_RUNNERS = {
    "field-dump": _suite_field_dump,
    "singleton": _suite_singleton,
    "gap": _suite_gap,
    "sandwich": _suite_sandwich,
    "monotonicity": _suite_monotonicity,
    "theorem-a": _suite_theorem_a,
    "theorem-b": _suite_theorem_b,
}


def scenario_hash(raw: dict) -> str:
    blob = json.dumps(_sanitize(raw), sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:12]


def run_scenario(source, out_base=None, tol: float | None = None, seed: int | None = None, echo=print) -> int:
    """Run every suite of a scenario; write reports; return the exit code.

    0 when all suites pass, 2 on any suite failure, 1 on malformed input or a
    cap trip. ``tol``/``seed`` override the scenario values.
    """
    try:
        scenario = load_scenario(source)
        if tol is not None:
            if tol <= 0:
                raise ScenarioError("scenario.tol: must be positive")
            scenario.tol = float(tol)
            scenario.raw = dict(scenario.raw, tol=float(tol))
        if seed is not None:
            scenario.seed = int(seed)
            scenario.raw = dict(scenario.raw, seed=int(seed))
    except ScenarioError as exc:
        echo(f"error: {exc}")
        return 1

    h = scenario_hash(scenario.raw)
    out_dir = os.path.join(out_base or "fitzkit-runs", f"{scenario.name}-{h}")
    os.makedirs(out_dir, exist_ok=True)

    suite_reports = []
    overall = True
    for i, suite in enumerate(scenario.suites):
        path = f"scenario.suites[{i}]"
        kind = suite["kind"]
        name = suite.get("name", f"{i:02d}-{kind}")
        obj = scenario.objects[suite["object"]]
        try:
            passed, details, fields = _RUNNERS[kind](scenario, suite, obj, path)
        except ScenarioError as exc:
            echo(f"error: {exc}")
            return 1
        except CapExceeded as exc:
            echo(f"error: {path}: {exc}")
            return 1
        except LPFailure as exc:
            echo(f"error: {path}: LP failure: {exc}")
            return 1

        report = {
            "index": i,
            "name": name,
            "kind": kind,
            "object": suite["object"],
            "pass": bool(passed),
            "details": details,
        }
        suite_reports.append(report)
        overall = overall and passed
        echo(f"{'PASS' if passed else 'FAIL'} {name}")

        base = os.path.join(out_dir, f"{i:02d}_{kind}")
        with open(base + ".json", "w", encoding="utf-8") as fh:
            json.dump(_sanitize(report), fh, sort_keys=True, indent=2)
            fh.write("\n")
        for fname, text in fields.items():
            with open(f"{base}_{fname}.csv", "w", encoding="utf-8", newline="") as fh:
                fh.write(text)

    summary = {
        "fitzkit_version": __version__,
        "scenario": scenario.name,
        "hash": h,
        "tol": scenario.tol,
        "seed": scenario.seed,
        "assumptions": [SAMPLED_GRAPH_ASSUMPTION],
        "suites": suite_reports,
        "overall_pass": bool(overall),
    }
    with open(os.path.join(out_dir, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(_sanitize(summary), fh, sort_keys=True, indent=2)
        fh.write("\n")
    echo(f"{'PASS' if overall else 'FAIL'} overall -> {out_dir}")
    return 0 if overall else 2


# ---------------------------------------------------------------------------
# Builtin fixtures


def _circle_points(k: int = 12, radius: float = 1.0) -> list:
    return [
        [radius * math.cos(2.0 * math.pi * j / k), radius * math.sin(2.0 * math.pi * j / k)]
        for j in range(k)
    ]


def _builtin_abs() -> dict:
    return {
        "name": "abs",
        "tol": 1e-9,
        "seed": 2024,
        "objects": {
            "f": {
                "kind": "vkc",
                "K": [[0.0]],
                "V": [[-1.0], [1.0]],
                "C": [[1.0], [-1.0]],
                "xhat": [0.0],
                "xbar_star": [0.0],
                "c": 0.0,
            }
        },
        "lattices": {
            "primal": [{"lo": -3.0, "hi": 3.0, "count": 61}],
            "dual": [{"lo": -1.0, "hi": 1.0, "count": 41}],
            "dump-primal": [{"lo": -2.0, "hi": 2.0, "count": 21}],
            "dump-dual": [{"lo": -1.0, "hi": 1.0, "count": 11}],
        },
        "suites": [
            {"kind": "singleton", "object": "f", "primal": "primal", "dual": "dual", "random_probes": 64},
            {"kind": "gap", "object": "f", "primal": "primal", "dual": "dual", "agree_tol": 1e-4, "max_gap": 1e-6},
            {"kind": "field-dump", "object": "f", "primal": "dump-primal", "dual": "dump-dual"},
        ],
    }


def _builtin_quadratic() -> dict:
    count = 17
    xs = np.linspace(-2.0, 2.0, count)
    return {
        "name": "quadratic",
        "tol": 1e-9,
        "seed": 2024,
        "objects": {
            "f": {
                "kind": "grid",
                "axes": [{"lo": -2.0, "hi": 2.0, "count": count}],
                "values": [0.5 * float(x) ** 2 for x in xs],
            }
        },
        "lattices": {
            "primal": [{"lo": -2.0, "hi": 2.0, "count": count}],
            "dual": [{"lo": -2.0, "hi": 2.0, "count": count}],
            "probe-primal": [{"lo": -1.5, "hi": 1.5, "count": 13}],
            "probe-dual": [{"lo": -1.5, "hi": 1.5, "count": 13}],
        },
        "suites": [
            {
                "kind": "singleton",
                "object": "f",
                "primal": "primal",
                "dual": "dual",
                "probes": [[[[1.0], [-1.0]], [[-1.0], [1.0]]]],
                "random_probes": 0,
            },
            {"kind": "gap", "object": "f", "primal": "probe-primal", "dual": "probe-dual", "agree_tol": 1e-4},
            {"kind": "theorem-a", "object": "f", "primal": "primal", "dual": "dual", "vstar": [0.0], "expect": "fail-subgradient"},
        ],
    }


def _builtin_skew2d() -> dict:
    return {
        "name": "skew2d",
        "tol": 1e-9,
        "seed": 2024,
        "objects": {
            "A": {"kind": "linear", "matrix": [[0.0, -1.0], [1.0, 0.0]], "points": _circle_points()}
        },
        "lattices": {},
        "suites": [
            {"kind": "singleton", "object": "A", "random_probes": 64},
            {
                "kind": "monotonicity",
                "object": "A",
                "checks": [{"n": 2, "expect": True}, {"n": 3, "expect": False}],
                "cyclic_expect": False,
            },
        ],
    }


def _builtin_rotation(theta: float) -> dict:
    ct, st = math.cos(theta), math.sin(theta)
    checks = [{"n": n, "expect": bool(theta <= math.pi / n)} for n in (2, 3)]
    return {
        "name": f"rotation-{theta:g}",
        "tol": 1e-9,
        "seed": 2024,
        "objects": {
            "A": {"kind": "linear", "matrix": [[ct, -st], [st, ct]], "points": _circle_points()}
        },
        "lattices": {},
        "suites": [{"kind": "monotonicity", "object": "A", "checks": checks}],
    }


def _builtin_strip_vkc() -> dict:
    return {
        "name": "strip-vkc",
        "tol": 1e-9,
        "seed": 2024,
        "objects": {
            "f": {
                "kind": "vkc",
                "K": [[0.0, 0.0], [1.0, 0.0]],
                "V": [[0.0, -1.0], [0.0, 1.0]],
                "C": [[0.0, 1.0]],
                "xhat": [0.0, 0.0],
                "xbar_star": [0.0, 0.0],
                "c": 0.0,
            }
        },
        "lattices": {
            "primal": [{"lo": -0.5, "hi": 1.5, "count": 9}, {"lo": -0.5, "hi": 3.5, "count": 17}],
            "dual": [{"lo": -2.0, "hi": 2.0, "count": 17}, {"lo": -2.0, "hi": 1.0, "count": 13}],
        },
        "suites": [
            {"kind": "theorem-b", "object": "f", "primal": "primal", "dual": "dual", "eps": [0.1, 0.01]},
            {"kind": "gap", "object": "f", "primal": "primal", "dual": "dual", "agree_tol": 1e-4, "max_gap": 1e-6},
        ],
    }


def _builtin_two_point() -> dict:
    return {
        "name": "two-point",
        "tol": 1e-9,
        "seed": 2024,
        "objects": {
            "A": {"kind": "linear", "matrix": [[1.0]], "points": [[-1.0], [1.0]]}
        },
        "lattices": {
            "primal": [{"lo": -2.0, "hi": 2.0, "count": 41}],
            "dual": [{"lo": -2.0, "hi": 2.0, "count": 41}],
        },
        "suites": [
            {"kind": "sandwich", "object": "A", "w": [-1.0], "vstar": [1.0], "primal": "primal", "dual": "dual"},
            {
                "kind": "monotonicity",
                "object": "A",
                "checks": [{"n": 2, "expect": True}, {"n": 3, "expect": True}],
                "cyclic_expect": True,
            },
        ],
    }


def builtin_names() -> list[str]:
    return ["abs", "quadratic", "skew2d", "rotation(THETA)", "strip-vkc", "two-point"]


def generate_builtin(name: str) -> dict:
    """Canonical scenario dict for a named fixture; rotation takes rotation(theta)."""
    if name == "abs":
        return _builtin_abs()
    if name == "quadratic":
        return _builtin_quadratic()
    if name == "skew2d":
        return _builtin_skew2d()
    if name == "strip-vkc":
        return _builtin_strip_vkc()
    if name == "two-point":
        return _builtin_two_point()
    if name.startswith("rotation(") and name.endswith(")"):
        body = name[len("rotation(") : -1]
        try:
            theta = float(body)
        except ValueError as exc:
            raise ScenarioError(f"gen: invalid rotation angle {body!r}") from exc
        if not (0.0 <= theta <= math.pi):
            raise ScenarioError("gen: rotation angle must lie in [0, pi]")
        return _builtin_rotation(theta)
    raise ScenarioError(f"gen: unknown builtin {name!r}; choose from {', '.join(builtin_names())}")

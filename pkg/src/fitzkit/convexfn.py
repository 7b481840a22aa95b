"""Convex function representations, conjugation, and subdifferentials.

Exact variants (max of affines, polyhedral indicators, polytope supports, and
their tilted/shifted sums) are evaluated in closed form; grid-sampled
functions act as numerical oracles via the discrete Legendre transform.
Extended-real values use IEEE +inf, which propagates exactly through the sums
appearing here; large finite sentinels are never used.

The structural family sigma_V(x - xhat) + i_{K+C}(x) + <x, xbar*> + c is
carried by :class:`VKCSpec`. Its conjugate is computed exactly: for
V-represented polyhedral data, the union of normal cones of K + C over points
of K equals the polar cone of C (a support-attainment argument), so the
conjugate is sigma_K + i_{V + C°} up to the tilt/shift calculus and no face
enumeration is needed.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOL
from .geometry import (
    DimensionMismatch,
    HalfspaceCone,
    Polytope,
    PolyhedralCone,
    as_vector,
    extreme_points,
    minkowski_membership,
    orthogonality_check,
    polar_cone,
    polytope_membership,
    support_value,
)
from .linprog import solve_lp

__all__ = [
    "GridAxis",
    "FieldGrid",
    "ConvexFunction",
    "AffineMax",
    "IndicatorPolyhedron",
    "SupportOfPolytope",
    "Composite",
    "GridSampled",
    "FnSum",
    "VKCSpec",
    "InvalidVKCSpec",
    "VKCFunction",
    "vkc_function",
    "eval_vkc",
    "conjugate_vkc",
    "conjugate_grid",
    "legendre_1d",
    "inf_convolution_grid",
    "eps_subgradient_test",
    "SubdifferentialSet",
    "subdifferential_affine_max",
    "subdifferential_vkc",
    "affine_max_conjugate_value",
    "sample_function_grid",
    "grid_to_json",
    "grid_from_json",
    "grid_to_csv",
    "grid_from_csv",
]


# ---------------------------------------------------------------------------
# Grids


@dataclass(frozen=True)
class GridAxis:
    """Uniform 1-d lattice [lo, hi] with count >= 2 nodes."""

    lo: float
    hi: float
    count: int

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("axis bounds must be finite")
        if self.hi <= self.lo:
            raise ValueError("axis requires hi > lo")
        if int(self.count) != self.count or self.count < 2:
            raise ValueError("axis count must be an integer >= 2")
        object.__setattr__(self, "count", int(self.count))

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / (self.count - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.count)


def _axes_tuple(axes) -> tuple[GridAxis, ...]:
    out = []
    for a in axes:
        if isinstance(a, GridAxis):
            out.append(a)
        else:
            out.append(GridAxis(*a))
    if not out:
        raise ValueError("at least one axis required")
    return tuple(out)


@dataclass(frozen=True)
class FieldGrid:
    """Dense extended-real values over the product of uniform axes.

    Values are finite or +inf (the infinity flag); NaN and -inf are rejected.
    """

    axes: tuple[GridAxis, ...]
    values: np.ndarray

    def __post_init__(self):
        axes = _axes_tuple(self.axes)
        shape = tuple(a.count for a in axes)
        vals = np.asarray(self.values, dtype=float)
        if vals.size != int(np.prod(shape)):
            raise ValueError("values length must equal the product of axis counts")
        vals = vals.reshape(shape).copy()
        if np.any(np.isnan(vals)) or np.any(np.isneginf(vals)):
            raise ValueError("grid values must be finite or +inf")
        vals.flags.writeable = False
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "values", vals)

    @property
    def ndim(self) -> int:
        return len(self.axes)

    def node(self, index: tuple[int, ...]) -> np.ndarray:
        return np.array([ax.points[i] for ax, i in zip(self.axes, index)])

    def _locate(self, ax: GridAxis, x: float):
        """Snap-aware location: (node_index, None) on a node, else (cell, frac)."""
        snap = max(ax.step * 1e-9, 1e-12 * (abs(ax.lo) + abs(ax.hi) + 1.0))
        if x < ax.lo - snap or x > ax.hi + snap:
            return None
        t = (x - ax.lo) / ax.step
        j = int(round(t))
        if 0 <= j < ax.count and abs(x - ax.points[j]) <= snap:
            return (j, None)
        i = min(max(int(math.floor(t)), 0), ax.count - 2)
        frac = (x - ax.points[i]) / ax.step
        return (i, min(max(frac, 0.0), 1.0))

    def eval(self, x) -> float:
        """Multilinear interpolation; +inf outside the box or next to +inf cells.

        Queries landing exactly on nodes return the stored value, so indicator
        boundaries stay sharp on lattice-aligned evaluations.
        """
        x = as_vector(x, dim=self.ndim)
        locs = []
        for ax, xi in zip(self.axes, x):
            loc = self._locate(ax, float(xi))
            if loc is None:
                return math.inf
            locs.append(loc)
        total = 0.0
        acc = 0.0
        for corner in itertools.product(*[(0,) if f is None else (0, 1) for _, f in locs]):
            idx = tuple(i + off for (i, _), off in zip(locs, corner))
            w = 1.0
            for (_, f), off in zip(locs, corner):
                if f is not None:
                    w *= f if off else (1.0 - f)
            v = self.values[idx]
            if not math.isfinite(v):
                return math.inf
            acc += w * v
            total += w
        return acc


def sample_function_grid(fn, axes) -> FieldGrid:
    """Tabulate a scalar function of a vector over the axis product."""
    axes = _axes_tuple(axes)
    shape = tuple(a.count for a in axes)
    pts = [a.points for a in axes]
    vals = np.empty(shape)
    for index in np.ndindex(shape):
        x = np.array([pts[k][i] for k, i in enumerate(index)])
        vals[index] = fn(x)
    return FieldGrid(axes, vals)


def grid_to_json(grid: FieldGrid) -> dict:
    def enc(v: float):
        if math.isinf(v):
            return "inf"
        return float(v)

    return {
        "axes": [{"lo": a.lo, "hi": a.hi, "count": a.count} for a in grid.axes],
        "values": [enc(v) for v in grid.values.reshape(-1)],
    }


def grid_from_json(data: dict) -> FieldGrid:
    axes = [GridAxis(a["lo"], a["hi"], a["count"]) for a in data["axes"]]
    vals = [math.inf if v == "inf" else float(v) for v in data["values"]]
    return FieldGrid(tuple(axes), np.array(vals))


def grid_to_csv(grid: FieldGrid) -> str:
    """CSV with axis header rows then row-major (coords..., value) data rows."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["axis", "lo", "hi", "count"])
    for k, a in enumerate(grid.axes):
        w.writerow([k, repr(a.lo), repr(a.hi), a.count])
    w.writerow([f"x{k}" for k in range(grid.ndim)] + ["value"])
    pts = [a.points for a in grid.axes]
    for index in np.ndindex(grid.values.shape):
        coords = [repr(float(pts[k][i])) for k, i in enumerate(index)]
        v = grid.values[index]
        w.writerow(coords + ["inf" if math.isinf(v) else repr(float(v))])
    return buf.getvalue()


def grid_from_csv(text: str) -> FieldGrid:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0][:1] != ["axis"]:
        raise ValueError("missing axis header")
    axes = []
    i = 1
    while i < len(rows) and rows[i] and rows[i][0].isdigit():
        _, lo, hi, count = rows[i][:4]
        axes.append(GridAxis(float(lo), float(hi), int(count)))
        i += 1
    vals = []
    for row in rows[i + 1 :]:
        if not row:
            continue
        v = row[-1]
        vals.append(math.inf if v == "inf" else float(v))
    return FieldGrid(tuple(axes), np.array(vals))


# ---------------------------------------------------------------------------
# Convex function variants


class ConvexFunction:
    """Extended-real convex function on E; call with a point to evaluate."""

    dim: int

    def __call__(self, x) -> float:  # pragma: no cover - abstract
        raise NotImplementedError


def evaluate(f: ConvexFunction, x) -> float:
    return f(x)


class AffineMax(ConvexFunction):
    """max_i (<slopes_i, x> + intercepts_i); at least one piece."""

    def __init__(self, slopes, intercepts):
        slopes = np.asarray(slopes, dtype=float)
        if slopes.ndim == 1:
            slopes = slopes.reshape(-1, 1)
        intercepts = np.asarray(intercepts, dtype=float).reshape(-1)
        if slopes.shape[0] < 1 or slopes.shape[0] != intercepts.size:
            raise ValueError("AffineMax needs matching slopes and intercepts, at least one piece")
        if not (np.all(np.isfinite(slopes)) and np.all(np.isfinite(intercepts))):
            raise ValueError("AffineMax coefficients must be finite")
        self.slopes = slopes
        self.intercepts = intercepts
        self.dim = slopes.shape[1]

    def __call__(self, x) -> float:
        x = as_vector(x, dim=self.dim)
        return float(np.max(self.slopes @ x + self.intercepts))

    def piece_values(self, x) -> np.ndarray:
        x = as_vector(x, dim=self.dim)
        return self.slopes @ x + self.intercepts


class IndicatorPolyhedron(ConvexFunction):
    """Indicator of conv(K) + C; C is a generator cone, halfspace cone, or None."""

    def __init__(self, polytope: Polytope, cone=None):
        self.polytope = polytope
        self.cone = cone
        if cone is not None and cone.dim != polytope.dim:
            raise DimensionMismatch("indicator: polytope/cone dimension mismatch")
        self.dim = polytope.dim
        self.tol = DEFAULT_TOL

    def __call__(self, x) -> float:
        return 0.0 if minkowski_membership(self.polytope, self.cone, x, tol=self.tol) else math.inf


class SupportOfPolytope(ConvexFunction):
    def __init__(self, polytope: Polytope):
        self.polytope = polytope
        self.dim = polytope.dim

    def __call__(self, x) -> float:
        return support_value(self.polytope, x)


class Composite(ConvexFunction):
    """base(x - argshift) + <x, tilt> + shift."""

    def __init__(self, base: ConvexFunction, tilt=None, shift: float = 0.0, argshift=None):
        self.base = base
        self.dim = base.dim
        self.tilt = as_vector(tilt, dim=self.dim) if tilt is not None else None
        self.argshift = as_vector(argshift, dim=self.dim) if argshift is not None else None
        if not math.isfinite(shift):
            raise ValueError("shift must be finite")
        self.shift = float(shift)

    def __call__(self, x) -> float:
        x = as_vector(x, dim=self.dim)
        z = x - self.argshift if self.argshift is not None else x
        v = self.base(z)
        if math.isinf(v):
            return math.inf
        if self.tilt is not None:
            v += float(x @ self.tilt)
        return v + self.shift


class GridSampled(ConvexFunction):
    def __init__(self, grid: FieldGrid):
        self.grid = grid
        self.dim = grid.ndim

    def __call__(self, x) -> float:
        return self.grid.eval(x)


class FnSum(ConvexFunction):
    """Pointwise sum of convex functions; +inf short-circuits left to right."""

    def __init__(self, *parts: ConvexFunction):
        if not parts:
            raise ValueError("FnSum needs at least one part")
        dims = {p.dim for p in parts}
        if len(dims) != 1:
            raise DimensionMismatch("FnSum parts disagree on dimension")
        self.parts = tuple(parts)
        self.dim = parts[0].dim

    def __call__(self, x) -> float:
        total = 0.0
        for p in self.parts:
            v = p(x)
            if math.isinf(v):
                return math.inf
            total += v
        return total


# ---------------------------------------------------------------------------
# Discrete Legendre transform


def legendre_1d(xs: np.ndarray, vals: np.ndarray, duals: np.ndarray) -> np.ndarray:
    """Conjugate of one lattice line: sup_k (s x_k - v_k) for each dual s.

    The lower convex hull of the finite points is built once (monotone chain),
    then ascending duals are merged against the increasing hull slopes in
    linear time. Cells whose maximizer sits on a truncated lattice edge with a
    slope beyond the sampled range are flagged +inf (divergence not ruled out
    by the sample); -inf input cells mark an upstream divergence and force the
    whole output line to +inf.
    """
    xs = np.asarray(xs, dtype=float)
    vals = np.asarray(vals, dtype=float)
    duals = np.asarray(duals, dtype=float)
    if np.any(np.isneginf(vals)):
        return np.full(duals.size, np.inf)
    finite = np.isfinite(vals)
    if not finite.any():
        return np.full(duals.size, -np.inf)
    idx = np.flatnonzero(finite)
    px = xs[idx]
    pv = vals[idx]

    hull: list[int] = []
    for j in range(px.size):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            turn = (px[b] - px[a]) * (pv[j] - pv[a]) - (pv[b] - pv[a]) * (px[j] - px[a])
            if turn <= 0.0:
                hull.pop()
            else:
                break
        hull.append(j)
    hx = px[hull]
    hv = pv[hull]
    K = len(hull)
    slopes = np.diff(hv) / np.diff(hx) if K > 1 else np.zeros(0)
    left_edge = idx[0] == 0
    right_edge = idx[-1] == xs.size - 1

    out = np.empty(duals.size)
    k = 0
    for m, s in enumerate(duals):
        while k < K - 1 and s > slopes[k]:
            k += 1
        if K == 1:
            out[m] = np.inf if (left_edge or right_edge) else s * hx[0] - hv[0]
        elif k == K - 1 and right_edge and s > slopes[-1]:
            out[m] = np.inf
        elif k == 0 and left_edge and s < slopes[0]:
            out[m] = np.inf
        else:
            out[m] = s * hx[k] - hv[k]
    return out


def conjugate_grid(f: ConvexFunction, dual_axes, primal_axes=None) -> GridSampled:
    """Discrete Legendre transform onto the dual lattice (numerical oracle).

    The multidimensional transform factors into one 1-d pass per axis on a box
    lattice, conjugating the negated intermediate after the first axis. The
    primal lattice must cover the effective domain of f; for a GridSampled
    input it defaults to the function's own lattice.
    """
    dual_axes = _axes_tuple(dual_axes)
    if primal_axes is None:
        if not isinstance(f, GridSampled):
            raise ValueError("primal_axes required unless f is GridSampled")
        primal_axes = f.grid.axes
        table = np.array(f.grid.values, dtype=float)
    else:
        primal_axes = _axes_tuple(primal_axes)
        table = np.array(sample_function_grid(f, primal_axes).values, dtype=float)
    if len(dual_axes) != len(primal_axes):
        raise DimensionMismatch("dual axes count must match primal axes count")
    if not np.any(np.isfinite(table)):
        raise ValueError("f is +inf on the whole primal lattice; cannot conjugate")

    work = table
    nd = len(primal_axes)
    for ax in range(nd):
        src = work if ax == 0 else -work
        xs = primal_axes[ax].points
        duals = dual_axes[ax].points
        moved = np.moveaxis(src, ax, -1)
        lead = moved.shape[:-1]
        out = np.empty(lead + (duals.size,))
        for index in np.ndindex(lead):
            out[index] = legendre_1d(xs, moved[index], duals)
        work = np.moveaxis(out, -1, ax)
    if np.any(np.isneginf(work)):
        raise ValueError("conjugate is -inf somewhere on the dual lattice; enlarge the primal lattice")
    return GridSampled(FieldGrid(dual_axes, work))


def inf_convolution_grid(f: GridSampled, g: GridSampled) -> GridSampled:
    """(f box g)(x) = min over lattice shifts y of f(y) + g(x - y).

    Requires identical lattices; the result lives on the same lattice, with
    g evaluated by its own (snap-aware) interpolation at the shifted points.
    """
    if not isinstance(f, GridSampled) or not isinstance(g, GridSampled):
        raise TypeError("inf_convolution_grid expects GridSampled operands")
    if f.grid.axes != g.grid.axes:
        raise ValueError("lattice mismatch between operands")
    axes = f.grid.axes
    nd = len(axes)
    counts = [a.count for a in axes]
    steps = [a.step for a in axes]

    # g at all representable lattice differences (i - j) per axis.
    diff_ranges = [np.arange(-(c - 1), c) for c in counts]
    diff_vals = np.empty([r.size for r in diff_ranges])
    for index in np.ndindex(diff_vals.shape):
        z = np.array([diff_ranges[k][i] * steps[k] for k, i in enumerate(index)])
        diff_vals[index] = g(z)

    fv = f.grid.values
    out = np.empty(fv.shape)
    offsets = [c - 1 for c in counts]
    for x_index in np.ndindex(fv.shape):
        best = math.inf
        for y_index in np.ndindex(fv.shape):
            a = fv[y_index]
            if math.isinf(a):
                continue
            d = tuple(xi - yi + off for xi, yi, off in zip(x_index, y_index, offsets))
            b = diff_vals[d]
            if math.isinf(b):
                continue
            v = a + b
            if v < best:
                best = v
        out[x_index] = best
    return GridSampled(FieldGrid(axes, out))


# ---------------------------------------------------------------------------
# The structural (support + indicator) family


class InvalidVKCSpec(ValueError):
    pass


@dataclass(frozen=True)
class VKCSpec:
    """Structural data (K, V, C, xhat, xbar*, c) with 0 in V perpendicular to K - K.

    Encodes f(x) = sigma_V(x - xhat) + i_{K+C}(x) + <x, xbar*> + c. Invariants
    are enforced at construction: 0 in V (membership LP), V orthogonal to
    K - K, and xhat in K.
    """

    K: Polytope
    V: Polytope
    C: PolyhedralCone
    xhat: np.ndarray
    xbar_star: np.ndarray
    c: float = 0.0
    tol: float = field(default=DEFAULT_TOL, compare=False)

    def __post_init__(self):
        d = self.K.dim
        if self.V.dim != d or self.C.dim != d:
            raise InvalidVKCSpec("K, V, C must share a dimension")
        object.__setattr__(self, "xhat", as_vector(self.xhat, dim=d))
        object.__setattr__(self, "xbar_star", as_vector(self.xbar_star, dim=d))
        if not math.isfinite(self.c):
            raise InvalidVKCSpec("constant c must be finite")
        if not polytope_membership(self.V, np.zeros(d), tol=self.tol):
            raise InvalidVKCSpec("0 must belong to V")
        if not orthogonality_check(self.V, self.K, tol=self.tol):
            raise InvalidVKCSpec("V must be orthogonal to K - K")
        if not polytope_membership(self.K, self.xhat, tol=self.tol):
            raise InvalidVKCSpec("xhat must belong to K")

    @property
    def dim(self) -> int:
        return self.K.dim


class VKCFunction(ConvexFunction):
    """Evaluator for a VKCSpec: membership first, so +inf short-circuits."""

    def __init__(self, spec: VKCSpec):
        self.spec = spec
        self.dim = spec.dim

    def __call__(self, x) -> float:
        s = self.spec
        x = as_vector(x, dim=self.dim)
        if not minkowski_membership(s.K, s.C, x, tol=s.tol):
            return math.inf
        return support_value(s.V, x - s.xhat) + float(x @ s.xbar_star) + s.c


def vkc_function(spec: VKCSpec) -> VKCFunction:
    return VKCFunction(spec)


def eval_vkc(spec: VKCSpec, x) -> float:
    return VKCFunction(spec)(x)


def conjugate_vkc(spec: VKCSpec) -> ConvexFunction:
    """Exact conjugate: sigma_K(y - xbar*) + i_{V + C°}(y - xbar*) - c.

    The untilted conjugate is sigma_K plus the indicator of V + polar(C); the
    tilt and additive constant follow the standard shift rules
    (f + <., u> + c)*(y) = f*(y - u) - c. V + polar(C) is a closed polyhedron,
    so the closure in the general formula is automatic.
    """
    base = FnSum(
        IndicatorPolyhedron(spec.V, polar_cone(spec.C)),
        SupportOfPolytope(spec.K),
    )
    return Composite(base, argshift=spec.xbar_star, shift=-spec.c)


# ---------------------------------------------------------------------------
# Subdifferentials and Fenchel-Young style checks


def eps_subgradient_test(f: ConvexFunction, f_star: ConvexFunction, x, xstar, eps: float, tol: float = DEFAULT_TOL) -> bool:
    """Conjugate characterization: f(x) + f*(x*) <= <x, x*> + eps (+ tol)."""
    if eps < 0:
        raise ValueError("eps must be >= 0")
    fx = f(x)
    fs = f_star(xstar)
    if math.isinf(fx) or math.isinf(fs):
        return False
    x = as_vector(x)
    xstar = as_vector(xstar, dim=x.size)
    return fx + fs <= float(x @ xstar) + eps + tol


@dataclass(frozen=True)
class SubdifferentialSet:
    """conv(vertices) + cone, the cone in H-form (None = trivial)."""

    vertices: np.ndarray
    cone: HalfspaceCone | None = None

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def contains(self, z, tol: float = DEFAULT_TOL) -> bool:
        cone = self.cone
        if cone is not None and cone.normals.shape[0] == 0:
            cone = None
        return minkowski_membership(Polytope(self.vertices), cone, z, tol=tol)

    @property
    def mean_vertex(self) -> np.ndarray:
        return self.vertices.mean(axis=0)


def _normal_cone_hrep(K: Polytope, C: PolyhedralCone, x: np.ndarray) -> HalfspaceCone:
    """Normal cone of conv(K) + C at x, straight from the V-representation.

    s is normal at x iff <s, k - x> <= 0 for every vertex k and <s, g> <= 0
    for every generator g.
    """
    rows = [K.vertices - x[None, :]]
    if not C.is_trivial:
        rows.append(C.generators)
    return HalfspaceCone(np.vstack(rows))


def subdifferential_affine_max(f: AffineMax, x, tol: float = DEFAULT_TOL, domain: IndicatorPolyhedron | None = None) -> SubdifferentialSet:
    """Subdifferential of an affine-max (optionally restricted to a polyhedron).

    Returns conv of the tol-active slopes plus, when a domain is given, the
    normal cone of the domain at x in H-form. The domain cone must be in
    generator form. Raises when x is outside the domain.
    """
    x = as_vector(x, dim=f.dim)
    cone = None
    if domain is not None:
        dc = domain.cone
        if dc is None:
            dc = PolyhedralCone.zero(domain.dim)
        if not isinstance(dc, PolyhedralCone):
            raise TypeError("domain cone must be a generator PolyhedralCone")
        if not minkowski_membership(domain.polytope, dc, x, tol=tol):
            raise ValueError("x outside the domain polyhedron")
        cone = _normal_cone_hrep(domain.polytope, dc, x)
    vals = f.piece_values(x)
    active = f.slopes[vals >= vals.max() - tol]
    return SubdifferentialSet(extreme_points(active, tol=tol), cone)


def subdifferential_vkc(spec: VKCSpec, x, tol: float = DEFAULT_TOL) -> SubdifferentialSet:
    """Subdifferential of a VKC function at x in its domain.

    conv of the active V vertices shifted by the tilt, plus the normal cone of
    K + C at x.
    """
    x = as_vector(x, dim=spec.dim)
    if not minkowski_membership(spec.K, spec.C, x, tol=spec.tol):
        raise ValueError("x outside dom f")
    vals = spec.V.vertices @ (x - spec.xhat)
    active = spec.V.vertices[vals >= vals.max() - tol]
    verts = extreme_points(active, tol=tol) + spec.xbar_star[None, :]
    return SubdifferentialSet(verts, _normal_cone_hrep(spec.K, spec.C, x))


def affine_max_conjugate_value(f: AffineMax, ystar, tol: float = DEFAULT_TOL) -> float:
    """Exact conjugate of a max of affines at one dual point.

    Equals the convex envelope of the points (slope_i, -intercept_i): the LP
    min sum(lam_i * -b_i) over the simplex with sum(lam_i * slope_i) = y*.
    """
    ystar = as_vector(ystar, dim=f.dim)
    n = f.slopes.shape[0]
    a_eq = np.vstack([f.slopes.T, np.ones((1, n))])
    b_eq = np.concatenate([ystar, [1.0]])
    res = solve_lp(-f.intercepts, a_eq=a_eq, b_eq=b_eq, tol=tol)
    if res.status == "infeasible":
        return math.inf
    if not res.optimal:
        raise RuntimeError(f"conjugate LP ended with status {res.status}")
    return res.value

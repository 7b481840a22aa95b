"""Finite operator graphs, linear operators, and subdifferential sampling.

An :class:`OperatorGraph` is a finite list of primal-dual pairs standing in
for the graph of a set-valued operator; every supremum or infimum downstream
ranges over it. Graphs are immutable and deduplicated by exact coordinate
equality only (tolerant merging could silently collapse distinct kink
subgradients).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOL
from .convexfn import (
    AffineMax,
    ConvexFunction,
    GridAxis,
    GridSampled,
    VKCSpec,
    subdifferential_affine_max,
    subdifferential_vkc,
)
from .geometry import DimensionMismatch, as_vector

__all__ = [
    "DualPair",
    "OperatorGraph",
    "LinearOperator",
    "lattice_points",
    "linear_graph",
    "is_skew",
    "transform_graph",
    "sample_subdifferential",
]


@dataclass(frozen=True)
class DualPair:
    x: np.ndarray
    xstar: np.ndarray

    def __post_init__(self):
        x = as_vector(self.x)
        xstar = as_vector(self.xstar, dim=x.size)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "xstar", xstar)

    @property
    def dim(self) -> int:
        return self.x.size

    @property
    def coupling(self) -> float:
        return float(self.x @ self.xstar)


class OperatorGraph:
    """Immutable finite graph {(x_i, x_i*)} with a free-text label."""

    def __init__(self, X, XSTAR, label: str = ""):
        X = np.asarray(X, dtype=float)
        XSTAR = np.asarray(XSTAR, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if XSTAR.ndim == 1:
            XSTAR = XSTAR.reshape(-1, 1)
        if X.shape != XSTAR.shape or X.ndim != 2 or X.shape[0] < 1:
            raise ValueError("graph needs matching nonempty (n, d) primal and dual arrays")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(XSTAR))):
            raise ValueError("graph coordinates must be finite")
        stacked = np.hstack([X, XSTAR])
        seen = set()
        for row in stacked:
            key = row.tobytes()
            if key in seen:
                raise ValueError("exact duplicate pair in graph")
            seen.add(key)
        X = X.copy()
        XSTAR = XSTAR.copy()
        X.flags.writeable = False
        XSTAR.flags.writeable = False
        self.X = X
        self.XSTAR = XSTAR
        self.label = str(label)
        self._coupling = np.einsum("ij,ij->i", X, XSTAR)
        self._coupling.flags.writeable = False

    @classmethod
    def from_pairs(cls, pairs, label: str = "") -> "OperatorGraph":
        xs = [as_vector(p[0] if not isinstance(p, DualPair) else p.x) for p in pairs]
        ys = [as_vector(p[1] if not isinstance(p, DualPair) else p.xstar) for p in pairs]
        return cls(np.array(xs), np.array(ys), label=label)

    @property
    def n_pairs(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    @property
    def coupling(self) -> np.ndarray:
        return self._coupling

    @property
    def pairs(self) -> list[DualPair]:
        return [DualPair(x, y) for x, y in zip(self.X, self.XSTAR)]

    def pair(self, i: int) -> DualPair:
        return DualPair(self.X[i], self.XSTAR[i])

    def edge_matrix(self) -> np.ndarray:
        """M[i, j] = <a_j - a_i, a_i*>, the cycle-sum edge weights."""
        return self.XSTAR @ self.X.T - self._coupling[:, None]

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "pairs": [[list(map(float, x)), list(map(float, y))] for x, y in zip(self.X, self.XSTAR)],
        }

    @classmethod
    def from_json(cls, data: dict) -> "OperatorGraph":
        pairs = [(p[0], p[1]) for p in data["pairs"]]
        return cls.from_pairs(pairs, label=data.get("label", ""))

    def __repr__(self):
        return f"OperatorGraph(n={self.n_pairs}, dim={self.dim}, label={self.label!r})"


@dataclass(frozen=True)
class LinearOperator:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("linear operator must be a square matrix")
        if not np.all(np.isfinite(m)):
            raise ValueError("matrix entries must be finite")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def lattice_points(axes) -> np.ndarray:
    """All nodes of the axis product as (N, d) rows in row-major order."""
    axes = [a if isinstance(a, GridAxis) else GridAxis(*a) for a in axes]
    grids = np.meshgrid(*[a.points for a in axes], indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=-1)


def linear_graph(M, points) -> OperatorGraph:
    """Graph {(p, Mp)} over the given points."""
    mat = M.matrix if isinstance(M, LinearOperator) else np.asarray(M, dtype=float)
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if pts.shape[1] != mat.shape[1]:
        raise DimensionMismatch("points do not match the operator dimension")
    return OperatorGraph(pts, pts @ mat.T, label="linear")


def is_skew(M, tol: float = DEFAULT_TOL) -> bool:
    mat = M.matrix if isinstance(M, LinearOperator) else np.asarray(M, dtype=float)
    return bool(np.max(np.abs(mat + mat.T)) <= tol)


def transform_graph(G: OperatorGraph, lam1: float, lam2: float, w, wstar) -> OperatorGraph:
    """Pair map (x, x*) -> (lam1 x - w, lam2 x* - w*); scales must be positive."""
    if lam1 <= 0 or lam2 <= 0:
        raise ValueError("scales lam1, lam2 must be positive")
    w = as_vector(w, dim=G.dim)
    wstar = as_vector(wstar, dim=G.dim)
    return OperatorGraph(lam1 * G.X - w, lam2 * G.XSTAR - wstar, label=G.label + "~T")


def _emit(points_out, stars_out, x, sub):
    verts = sub.vertices
    order = np.lexsort(verts.T[::-1])
    for v in verts[order]:
        points_out.append(x)
        stars_out.append(v)
    if verts.shape[0] > 1:
        points_out.append(x)
        stars_out.append(sub.mean_vertex)


def sample_subdifferential(obj, axes, tol: float = DEFAULT_TOL, label: str | None = None) -> OperatorGraph:
    """Sample Gr(subdifferential) of a function over a box lattice.

    At multivalued points one pair per extreme subgradient is emitted plus the
    centroid; smooth points contribute a single pair. For grid-sampled
    functions the subgradient is the central-difference slope at interior
    nodes whose full neighborhood is finite. Supported inputs: VKCSpec,
    AffineMax, GridSampled.
    """
    pts = lattice_points(axes)
    xs: list[np.ndarray] = []
    ys: list[np.ndarray] = []

    if isinstance(obj, VKCSpec):
        for x in pts:
            try:
                sub = subdifferential_vkc(obj, x, tol=tol)
            except ValueError:
                continue
            _emit(xs, ys, x, sub)
        default_label = "vkc-subdiff"
    elif isinstance(obj, AffineMax):
        for x in pts:
            sub = subdifferential_affine_max(obj, x, tol=tol)
            _emit(xs, ys, x, sub)
        default_label = "affine-max-subdiff"
    elif isinstance(obj, GridSampled):
        grid = obj.grid
        vals = grid.values
        shape = vals.shape
        for index in np.ndindex(shape):
            if any(i == 0 or i == s - 1 for i, s in zip(index, shape)):
                continue
            if not math.isfinite(vals[index]):
                continue
            slope = np.empty(len(shape))
            ok = True
            for a in range(len(shape)):
                lo = tuple(i - (1 if k == a else 0) for k, i in enumerate(index))
                hi = tuple(i + (1 if k == a else 0) for k, i in enumerate(index))
                if not (math.isfinite(vals[lo]) and math.isfinite(vals[hi])):
                    ok = False
                    break
                slope[a] = (vals[hi] - vals[lo]) / (2.0 * grid.axes[a].step)
            if ok:
                xs.append(grid.node(index))
                ys.append(slope)
        default_label = "grid-slope"
    elif isinstance(obj, ConvexFunction):
        raise TypeError(f"no subdifferential sampler for {type(obj).__name__}")
    else:
        raise TypeError(f"cannot sample subdifferential of {type(obj).__name__}")

    if not xs:
        raise ValueError("lattice does not meet the domain of the function")

    # Exact-equality dedup, first occurrence wins.
    seen = set()
    keep_x: list[np.ndarray] = []
    keep_y: list[np.ndarray] = []
    for x, y in zip(xs, ys):
        key = (np.asarray(x).tobytes(), np.asarray(y).tobytes())
        if key in seen:
            continue
        seen.add(key)
        keep_x.append(x)
        keep_y.append(y)
    return OperatorGraph(np.array(keep_x), np.array(keep_y), label=label or default_label)

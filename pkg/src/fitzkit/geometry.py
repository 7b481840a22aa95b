"""Polytopes, polyhedral cones, and the support/indicator/polar calculus.

Sets are carried in V-representation (vertices for polytopes, generators for
cones). The one H-representation object is :class:`HalfspaceCone`, produced by
:func:`polar_cone`; it is what normal cones and polars of generator cones look
like here, and membership against it reduces to inequality evaluation or a
small feasibility LP.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOL
from .linprog import solve_lp

__all__ = [
    "DimensionMismatch",
    "Polytope",
    "PolyhedralCone",
    "HalfspaceCone",
    "as_vector",
    "support_value",
    "cone_support_value",
    "polar_cone",
    "orthogonality_check",
    "minkowski_membership",
    "polytope_membership",
    "extreme_points",
]


class DimensionMismatch(ValueError):
    pass


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


def as_vector(x, dim: int | None = None) -> np.ndarray:
    """Validate and normalize a point of E to a read-only 1-d float array."""
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1 or v.size < 1:
        raise ValueError("expected a 1-d vector with dimension >= 1")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    if dim is not None and v.size != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {v.size}")
    return _freeze(v)


def _point_matrix(rows, what: str, allow_empty: bool = False, dim: int | None = None) -> np.ndarray:
    m = np.asarray(rows, dtype=float)
    if m.size == 0:
        if not allow_empty:
            raise ValueError(f"{what} needs at least one point")
        m = m.reshape(0, dim if dim is not None else 0)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2 or (m.shape[0] > 0 and m.shape[1] < 1):
        raise ValueError(f"{what} must be a list of equal-length coordinate rows")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{what} entries must be finite")
    if dim is not None and m.shape[0] > 0 and m.shape[1] != dim:
        raise DimensionMismatch(f"{what}: expected dimension {dim}, got {m.shape[1]}")
    return _freeze(m)


@dataclass(frozen=True)
class Polytope:
    """Convex hull of finitely many vertices (V-representation)."""

    vertices: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vertices", _point_matrix(self.vertices, "polytope vertices"))

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @classmethod
    def singleton(cls, point) -> "Polytope":
        return cls(np.asarray(point, dtype=float).reshape(1, -1))


@dataclass(frozen=True)
class PolyhedralCone:
    """All nonnegative combinations of the generators; no generators = {0}."""

    generators: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.generators, dtype=float)
        if g.size == 0 and g.ndim != 2:
            raise ValueError("an empty cone needs an explicit (0, d) generator array; use PolyhedralCone.zero(d)")
        object.__setattr__(self, "generators", _point_matrix(g, "cone generators", allow_empty=True, dim=g.shape[1] if g.ndim == 2 else None))

    @property
    def dim(self) -> int:
        return self.generators.shape[1]

    @property
    def is_trivial(self) -> bool:
        return self.generators.shape[0] == 0

    @classmethod
    def zero(cls, dim: int) -> "PolyhedralCone":
        return cls(np.zeros((0, dim)))


@dataclass(frozen=True)
class HalfspaceCone:
    """Cone {x : <x, n_j> <= 0 for every normal row n_j}; no rows = whole space."""

    normals: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.normals, dtype=float)
        object.__setattr__(self, "normals", _point_matrix(n, "halfspace normals", allow_empty=True, dim=n.shape[1] if n.ndim == 2 else None))

    @property
    def dim(self) -> int:
        return self.normals.shape[1]

    @classmethod
    def whole_space(cls, dim: int) -> "HalfspaceCone":
        return cls(np.zeros((0, dim)))

    def contains(self, x, tol: float = DEFAULT_TOL) -> bool:
        if self.normals.shape[0] == 0:
            return True
        x = as_vector(x, dim=self.dim)
        return bool(np.all(self.normals @ x <= tol))


def support_value(P: Polytope, x) -> float:
    """Support function of a polytope: max over vertices of <x, v>."""
    x = as_vector(x, dim=P.dim)
    return float(np.max(P.vertices @ x))


def cone_support_value(C: PolyhedralCone, x, tol: float = DEFAULT_TOL) -> float:
    """Support function of a generator cone via LP: 0 on the polar, +inf off it.

    The LP maximizes <x, sum mu_j g_j> over mu >= 0; unboundedness is the
    +inf flag. This is the generator-side route cross-checked against
    :func:`polar_cone` membership.
    """
    if C.is_trivial:
        return 0.0
    x = as_vector(x, dim=C.dim)
    q = C.generators @ x
    res = solve_lp(-q, tol=tol)
    if res.status == "unbounded":
        return np.inf
    return 0.0


def polar_cone(C: PolyhedralCone) -> HalfspaceCone:
    """Polar of a generator cone, as halfspaces {x : <x, g_j> <= 0}."""
    return HalfspaceCone(C.generators)


def orthogonality_check(V: Polytope, K: Polytope, tol: float = DEFAULT_TOL) -> bool:
    """True iff every vertex of V is orthogonal to every difference of K vertices.

    Bilinearity makes the vertex check sufficient for V perpendicular to K - K.
    """
    if V.dim != K.dim:
        raise DimensionMismatch("orthogonality_check: dimension mismatch")
    kv = K.vertices
    diffs = (kv[:, None, :] - kv[None, :, :]).reshape(-1, K.dim)
    if diffs.shape[0] == 0:
        return True
    return bool(np.max(np.abs(V.vertices @ diffs.T), initial=0.0) <= tol)


def minkowski_membership(K: Polytope, C, x, tol: float = DEFAULT_TOL) -> bool:
    """Membership of x in K + C for a polytope K and cone C.

    C may be a generator :class:`PolyhedralCone`, a :class:`HalfspaceCone`, or
    None (the trivial cone). Polyhedral sums are closed, so no closure step is
    needed. Decided by a phase-one feasibility LP with residual <= tol.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    x = as_vector(x, dim=K.dim)
    nk = K.n_vertices
    ones = np.ones((1, nk))

    if C is None or (isinstance(C, PolyhedralCone) and C.is_trivial):
        a_eq = np.vstack([K.vertices.T, ones])
        b_eq = np.concatenate([x, [1.0]])
        res = solve_lp(np.zeros(nk), a_eq=a_eq, b_eq=b_eq, tol=tol)
        return res.optimal

    if isinstance(C, PolyhedralCone):
        if C.dim != K.dim:
            raise DimensionMismatch("minkowski_membership: dimension mismatch")
        nc = C.generators.shape[0]
        a_eq = np.zeros((K.dim + 1, nk + nc))
        a_eq[: K.dim, :nk] = K.vertices.T
        a_eq[: K.dim, nk:] = C.generators.T
        a_eq[K.dim, :nk] = 1.0
        b_eq = np.concatenate([x, [1.0]])
        res = solve_lp(np.zeros(nk + nc), a_eq=a_eq, b_eq=b_eq, tol=tol)
        return res.optimal

    if isinstance(C, HalfspaceCone):
        if C.dim != K.dim:
            raise DimensionMismatch("minkowski_membership: dimension mismatch")
        # x = sum(lam_i k_i) + n with N n <= 0 eliminates n:
        # N x - N K^T lam <= 0 over the simplex in lam.
        N = C.normals
        if N.shape[0] == 0:
            return True
        a_ub = -(N @ K.vertices.T)
        b_ub = -(N @ x)
        res = solve_lp(np.zeros(nk), a_eq=ones, b_eq=np.array([1.0]), a_ub=a_ub, b_ub=b_ub, tol=tol)
        return res.optimal

    raise TypeError(f"unsupported cone type {type(C).__name__}")


def polytope_membership(P: Polytope, x, tol: float = DEFAULT_TOL) -> bool:
    return minkowski_membership(P, None, x, tol=tol)


def extreme_points(points: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Extreme points of conv(points), order-preserving, exact duplicates dropped."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(1, -1)
    seen: dict[bytes, int] = {}
    unique = []
    for row in pts:
        key = row.tobytes()
        if key not in seen:
            seen[key] = len(unique)
            unique.append(row)
    pts = np.array(unique)
    n = pts.shape[0]
    if n <= 1:
        return pts
    keep = []
    for i in range(n):
        others = np.delete(pts, i, axis=0)
        if not polytope_membership(Polytope(others), pts[i], tol=tol):
            keep.append(i)
    return pts[keep]

"""Shared fixtures and independent brute-force oracles for the test suite."""

from __future__ import annotations

import math

import numpy as np

from fitzkit import (
    OperatorGraph,
    PolyhedralCone,
    Polytope,
    VKCSpec,
    linear_graph,
)
from fitzkit.convexfn import GridAxis


def abs_spec() -> VKCSpec:
    """f(x) = |x| on the line: K = {0}, V = [-1, 1], C spans both directions."""
    return VKCSpec(
        K=Polytope([[0.0]]),
        V=Polytope([[-1.0], [1.0]]),
        C=PolyhedralCone([[1.0], [-1.0]]),
        xhat=[0.0],
        xbar_star=[0.0],
        c=0.0,
    )


def strip_spec() -> VKCSpec:
    """f(x, y) = |y| on the strip [0, 1] x [0, inf)."""
    return VKCSpec(
        K=Polytope([[0.0, 0.0], [1.0, 0.0]]),
        V=Polytope([[0.0, -1.0], [0.0, 1.0]]),
        C=PolyhedralCone([[0.0, 1.0]]),
        xhat=[0.0, 0.0],
        xbar_star=[0.0, 0.0],
        c=0.0,
    )


def identity_graph(lo=-2.0, hi=2.0, count=9) -> OperatorGraph:
    pts = np.linspace(lo, hi, count).reshape(-1, 1)
    return linear_graph(np.eye(1), pts)


def two_point_graph() -> OperatorGraph:
    return OperatorGraph([[-1.0], [1.0]], [[-1.0], [1.0]], label="two-point")


def rotation_matrix(theta: float) -> np.ndarray:
    return np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])


def circle_points(k: int = 12, radius: float = 1.0) -> np.ndarray:
    ang = 2.0 * math.pi * np.arange(k) / k
    return np.stack([radius * np.cos(ang), radius * np.sin(ang)], axis=1)


def rotation_graph(theta: float, k: int = 12) -> OperatorGraph:
    return linear_graph(rotation_matrix(theta), circle_points(k))


def skew_circle_graph(k: int = 12) -> OperatorGraph:
    return rotation_graph(math.pi / 2.0, k)


def axis(lo, hi, count) -> GridAxis:
    return GridAxis(lo, hi, count)


def brute_n_monotone(G: OperatorGraph, n: int, tol: float = 1e-9):
    """Literal enumeration of every index n-tuple with repetition.

    Independent of the production DP route; returns (monotone, max cycle sum).
    """
    M = G.edge_matrix()
    g = M.shape[0]
    idx = np.indices((g,) * n).reshape(n, -1)
    total = np.zeros(idx.shape[1])
    for k in range(n):
        total += M[idx[k], idx[(k + 1) % n]]
    best = float(total.max())
    return best <= n * tol, best


def brute_legendre(xs: np.ndarray, vals: np.ndarray, s: float) -> float:
    """Dense max of s*x - v over finite lattice values."""
    finite = np.isfinite(vals)
    if not finite.any():
        return -math.inf
    return float(np.max(s * xs[finite] - vals[finite]))

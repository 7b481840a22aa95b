"""Cyclic-monotonicity certification and potential reconstruction.

One sign convention throughout: a length-n tuple violates monotonicity when
its cycle sum sum_i <a_{i+1} - a_i, a_i*> exceeds zero (indices wrap). All
witnesses carry that sum. Tolerance enters cycle sums additively per edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOL
from .convexfn import AffineMax, _axes_tuple
from .fitzpatrick import fitzpatrick_batch
from .operators import OperatorGraph, lattice_points

__all__ = [
    "CapExceeded",
    "CycleWitness",
    "is_n_monotone",
    "is_cyclically_monotone",
    "rockafellar_potential",
    "TheoremAReport",
    "theorem_a_suite",
]

MAX_N_DEFAULT = 6
MAX_TUPLES_DEFAULT = 64_000  # |G|^n cap; 40^3 at the common n = 3


class CapExceeded(RuntimeError):
    """Enumeration bound exceeded; refuse rather than truncate silently."""


@dataclass(frozen=True)
class CycleWitness:
    indices: tuple[int, ...]
    cycle_sum: float


def _max_closed_walk(M: np.ndarray, n: int):
    """Maximal weight over closed walks with exactly n edges, with a witness.

    Dynamic program over walk length; exactly the maximum over all n-tuples
    with repetition, since tuples and closed n-walks coincide.
    """
    if n == 2:
        S = M + M.T
        i, j = np.unravel_index(int(np.argmax(S)), S.shape)
        return float(S[i, j]), (int(i), int(j))
    best = M.copy()  # walks with 1 edge
    parents = []
    for _ in range(n - 1):
        cand = best[:, :, None] + M[None, :, :]  # (i, k, j) = best[i, k] + M[k, j]
        parents.append(cand.argmax(axis=1))  # (i, j) -> best intermediate k
        best = cand.max(axis=1)
    i0 = int(np.argmax(np.diag(best)))
    total = float(best[i0, i0])
    # Reconstruct i0 -> ... -> i0 with n edges.
    nodes = [i0]
    j = i0
    for step in range(n - 1, 0, -1):
        k = int(parents[step - 1][i0, j])
        nodes.append(k)
        j = k
    nodes.append(i0)
    nodes.reverse()  # now i0, t1, ..., t_{n-1}, i0 in walk order
    return total, tuple(nodes[:-1])


def is_n_monotone(G: OperatorGraph, n: int, tol: float = DEFAULT_TOL, max_n: int = MAX_N_DEFAULT, max_tuples: int = MAX_TUPLES_DEFAULT):
    """Check n-cyclic monotonicity over every n-tuple (repetitions allowed).

    Returns (True, None) or (False, maximal-violation CycleWitness). Caps:
    n <= max_n and |G|**n <= max_tuples, else CapExceeded.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if n > max_n:
        raise CapExceeded(f"n = {n} exceeds the cap {max_n}")
    g = G.n_pairs
    if g**n > max_tuples:
        raise CapExceeded(f"|G|^n = {g}^{n} exceeds the tuple cap {max_tuples}")
    M = G.edge_matrix()
    total, nodes = _max_closed_walk(M, n)
    if total <= n * tol:
        return True, None
    return False, CycleWitness(nodes, total)


def is_cyclically_monotone(G: OperatorGraph, tol: float = DEFAULT_TOL):
    """Positive-cycle detection on the complete weight digraph (Bellman-Ford).

    Edge weight i -> j is <a_j - a_i, a_i*>; the graph is cyclically monotone
    iff no cycle has positive weight. Detection relaxes the negated weights
    from a virtual all-zero source: improvement still possible after |G|
    rounds certifies a positive cycle. The witness is then recovered by the
    closed-walk maximizer, shortest violating length first (a violating
    simple cycle of length <= |G| must exist).
    """
    g = G.n_pairs
    M = G.edge_matrix()
    W = -M
    dist = np.zeros(g)
    found = False
    for _ in range(g):
        best = (dist[:, None] + W).min(axis=0)
        improved = best < dist - tol
        if not improved.any():
            break
        dist = np.minimum(dist, best)
    else:
        found = True
    if not found:
        return True, None
    for n in range(2, g + 1):
        total, nodes = _max_closed_walk(M, n)
        if total > n * tol:
            return False, CycleWitness(nodes, total)
    return True, None  # tolerance artifact, no genuine positive cycle


def rockafellar_potential(G: OperatorGraph, base: int = 0, tol: float = DEFAULT_TOL) -> AffineMax:
    """Convex potential whose subdifferential graph contains G.

    Longest-path weights d_i from the base pair over the cycle-sum digraph
    (finite because no positive cycle) give
    f(x) = max_i (d_i + <x - a_i, a_i*>). Fenchel-Young equality holds at
    every graph pair up to roundoff.
    """
    ok, wit = is_cyclically_monotone(G, tol=tol)
    if not ok:
        raise ValueError(f"graph is not cyclically monotone; witness cycle {wit.indices} with sum {wit.cycle_sum}")
    g = G.n_pairs
    if not 0 <= base < g:
        raise ValueError("base index out of range")
    M = G.edge_matrix()
    d = np.full(g, -np.inf)
    d[base] = 0.0
    for _ in range(g - 1):
        cand = (d[:, None] + M).max(axis=0)
        d = np.maximum(d, cand)
    if not np.all(np.isfinite(d)):  # complete digraph: one round reaches all
        raise RuntimeError("unreachable pair in potential construction")
    intercepts = d - G.coupling
    return AffineMax(G.XSTAR.copy(), intercepts)


@dataclass(frozen=True)
class TheoremAReport:
    convexity_ok: bool
    subgradient_ok: bool
    worst_convexity_violation: float
    worst_subgradient_violation: float
    failures: list  # (pair_index, lattice_index, slack)

    @property
    def passed(self) -> bool:
        return self.convexity_ok and self.subgradient_ok


def theorem_a_suite(G: OperatorGraph, vstar, primal_axes, tol: float = DEFAULT_TOL) -> TheoremAReport:
    """Slice test of the reconstruction identity A = d F_A(., v*).

    Builds g(x) = F(x, v*) on the lattice, asserts midpoint convexity, and for
    every graph pair with on-lattice x checks the subgradient inequality
    g(y) >= g(x) + <y - x, x*> - tol at all lattice points y. Requires v* to
    appear as a sampled image point and the graph to be 3-monotone.
    """
    vstar = np.asarray(vstar, dtype=float).reshape(-1)
    if not np.any(np.all(np.abs(G.XSTAR - vstar[None, :]) <= tol, axis=1)):
        raise ValueError("v* must appear in the sampled image")
    # Precondition check sized to the suite's own graph (the DP is cubic).
    ok3, wit = is_n_monotone(G, 3, tol=tol, max_tuples=max(MAX_TUPLES_DEFAULT, G.n_pairs**3))
    if not ok3:
        raise ValueError(f"graph fails 3-monotonicity; witness sum {wit.cycle_sum}")

    axes = _axes_tuple(primal_axes)
    P = lattice_points(axes)
    gvals = fitzpatrick_batch(G, P, np.broadcast_to(vstar, P.shape))

    shape = tuple(a.count for a in axes)
    table = gvals.reshape(shape)
    conv_viol = 0.0
    for index in np.ndindex(shape):
        for ax in range(len(shape)):
            if 0 < index[ax] < shape[ax] - 1:
                lo = tuple(i - (1 if k == ax else 0) for k, i in enumerate(index))
                hi = tuple(i + (1 if k == ax else 0) for k, i in enumerate(index))
                gap = table[index] - 0.5 * (table[lo] + table[hi])
                conv_viol = max(conv_viol, gap)
    scale = 1.0 + float(np.max(np.abs(gvals)))
    conv_ok = conv_viol <= tol * scale + 1e-12 * scale

    sub_viol = 0.0
    failures = []
    snap = max(a.step for a in axes) * 1e-9
    for k in range(G.n_pairs):
        x = G.X[k]
        hits = np.flatnonzero(np.all(np.abs(P - x[None, :]) <= snap, axis=1))
        if hits.size == 0:
            continue
        gx = gvals[hits[0]]
        rhs = gx + (P - x[None, :]) @ G.XSTAR[k]
        slack = gvals - rhs
        j = int(np.argmin(slack))
        if slack[j] < -(tol * scale + 1e-12 * scale):
            failures.append((k, j, float(slack[j])))
            sub_viol = max(sub_viol, float(-slack[j]))
    return TheoremAReport(conv_ok, not failures, conv_viol, sub_viol, failures)

"""Dense two-phase simplex for the small linear programs used package-wide.

Standard form is ``min c @ x  s.t.  A @ x = b, x >= 0``. Inequality rows are
handled by :func:`solve_lp`, which appends slack variables. Bland's rule makes
the pivot sequence finite and deterministic; instances here stay at a few
hundred variables, so a full dense tableau is adequate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOL

__all__ = ["LPFailure", "LPResult", "simplex_standard", "solve_lp"]


class LPFailure(RuntimeError):
    """Simplex did not terminate within its iteration budget."""


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: float  # +inf when infeasible, -inf when unbounded
    x: np.ndarray | None = None  # primal certificate in the caller's variables

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _pivot(T: np.ndarray, basis: list[int], row: int, col: int) -> None:
    T[row] /= T[row, col]
    for i in range(T.shape[0]):
        if i != row and T[i, col] != 0.0:
            T[i] -= T[i, col] * T[row]
    basis[row] = col


def _iterate(T: np.ndarray, basis: list[int], n_cols: int, tol: float, max_iter: int) -> str:
    """Pivot with Bland's rule until optimal or unbounded.

    Only the first ``n_cols`` columns may enter the basis (this keeps
    artificial variables out during and after phase one).
    """
    m = T.shape[0] - 1
    for _ in range(max_iter):
        enter = -1
        for j in range(n_cols):
            if T[-1, j] < -tol:
                enter = j
                break
        if enter < 0:
            return "optimal"
        leave = -1
        best = np.inf
        for i in range(m):
            a = T[i, enter]
            if a > tol:
                ratio = T[i, -1] / a
                if ratio < best - 1e-12:
                    best, leave = ratio, i
                elif ratio <= best + 1e-12 and leave >= 0 and basis[i] < basis[leave]:
                    leave = i
        if leave < 0:
            return "unbounded"
        _pivot(T, basis, leave, enter)
    raise LPFailure("simplex iteration budget exhausted")


def simplex_standard(c, A, b, tol: float = DEFAULT_TOL) -> LPResult:
    """Solve ``min c @ x  s.t.  A @ x = b, x >= 0`` (A may have zero rows)."""
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2:
        A = A.reshape(0, c.size)
    m, n = A.shape
    if c.size != n or b.size != m:
        raise ValueError("inconsistent LP dimensions")

    if m == 0:
        if np.any(c < -tol):
            return LPResult("unbounded", -np.inf, None)
        return LPResult("optimal", 0.0, np.zeros(n))

    A = A.copy()
    b = b.copy()
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    # Phase one: artificial basis, cost = sum of artificials.
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(n, n + m))
    max_iter = 200 * (n + m + 10)

    _iterate(T, basis, n, tol, max_iter)
    if -T[-1, -1] > tol:
        return LPResult("infeasible", np.inf, None)

    # Drive leftover artificials out of the basis; drop redundant rows.
    keep = []
    for i in range(m):
        if basis[i] >= n:
            piv = next((j for j in range(n) if abs(T[i, j]) > tol), None)
            if piv is None:
                continue  # redundant constraint
            _pivot(T, basis, i, piv)
        keep.append(i)

    m2 = len(keep)
    T2 = np.zeros((m2 + 1, n + 1))
    T2[:m2, :n] = T[keep][:, :n]
    T2[:m2, -1] = T[keep][:, -1]
    basis = [basis[i] for i in keep]
    T2[-1, :n] = c
    for i, bj in enumerate(basis):
        if T2[-1, bj] != 0.0:
            T2[-1] -= T2[-1, bj] * T2[i]

    status = _iterate(T2, basis, n, tol, max_iter)
    if status == "unbounded":
        return LPResult("unbounded", -np.inf, None)
    x = np.zeros(n)
    for i, bj in enumerate(basis):
        x[bj] = max(T2[i, -1], 0.0)
    return LPResult("optimal", float(c @ x), x)


def solve_lp(c, a_eq=None, b_eq=None, a_ub=None, b_ub=None, tol: float = DEFAULT_TOL) -> LPResult:
    """Solve ``min c @ x`` over ``x >= 0`` with equality and <= rows.

    Slack variables for the inequality rows are internal; the returned
    certificate is restricted to the caller's variables.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    rows = []
    rhs = []
    if a_eq is not None:
        a_eq = np.asarray(a_eq, dtype=float).reshape(-1, n)
        b_eq = np.asarray(b_eq, dtype=float).reshape(-1)
        rows.append(a_eq)
        rhs.append(b_eq)
    k = 0
    if a_ub is not None:
        a_ub = np.asarray(a_ub, dtype=float).reshape(-1, n)
        b_ub = np.asarray(b_ub, dtype=float).reshape(-1)
        k = a_ub.shape[0]
        rows.append(a_ub)
        rhs.append(b_ub)
    if not rows:
        return simplex_standard(c, np.zeros((0, n)), np.zeros(0), tol=tol)

    m_eq = rows[0].shape[0] if a_eq is not None else 0
    A = np.zeros((m_eq + k, n + k))
    A[:, :n] = np.vstack(rows)
    if k:
        A[m_eq:, n:] = np.eye(k)
    b = np.concatenate(rhs)
    c_full = np.concatenate([c, np.zeros(k)])
    res = simplex_standard(c_full, A, b, tol=tol)
    x = res.x[:n] if res.x is not None else None
    return LPResult(res.status, res.value, x)

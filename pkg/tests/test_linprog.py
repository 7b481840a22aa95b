import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fitzkit.linprog import simplex_standard, solve_lp


def test_simple_equality_lp():
    # min x1 + 2 x2 with x1 + x2 = 1
    res = solve_lp(np.array([1.0, 2.0]), a_eq=[[1.0, 1.0]], b_eq=[1.0])
    assert res.optimal
    assert res.value == pytest.approx(1.0)
    assert res.x == pytest.approx([1.0, 0.0])


def test_infeasible():
    # x1 + x2 = -1 impossible over the nonnegative orthant
    res = solve_lp(np.zeros(2), a_eq=[[1.0, 1.0]], b_eq=[-1.0])
    assert res.status == "infeasible"
    assert res.value == np.inf


def test_unbounded():
    res = solve_lp(np.array([-1.0, 0.0]), a_ub=[[0.0, 1.0]], b_ub=[1.0])
    assert res.status == "unbounded"
    assert res.value == -np.inf


def test_no_constraints():
    assert solve_lp(np.array([1.0, 0.5])).value == 0.0
    assert solve_lp(np.array([-1.0])).status == "unbounded"


def test_inequalities_with_negative_rhs():
    # min -x s.t. x <= 3, -x <= -1 (i.e. x >= 1)
    res = solve_lp(np.array([-1.0]), a_ub=[[1.0], [-1.0]], b_ub=[3.0, -1.0])
    assert res.optimal
    assert res.value == pytest.approx(-3.0)


def test_redundant_rows_are_dropped():
    a = [[1.0, 1.0], [2.0, 2.0]]
    res = solve_lp(np.array([1.0, 1.0]), a_eq=a, b_eq=[1.0, 2.0])
    assert res.optimal
    assert res.value == pytest.approx(1.0)


def test_degenerate_vertex_terminates():
    # Several constraints meeting at one vertex; Bland's rule must not cycle.
    a_ub = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]
    res = solve_lp(np.array([-1.0, -1.0]), a_ub=a_ub, b_ub=[1.0, 1.0, 1.0])
    assert res.optimal
    assert res.value == pytest.approx(-1.0)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 5), st.integers(1, 3), st.randoms(use_true_random=False))
def test_feasible_certificates_are_feasible(n, m, rnd):
    rng = np.random.default_rng(rnd.randrange(2**32))
    A = rng.normal(size=(m, n))
    x0 = rng.random(n)  # known feasible point
    b = A @ x0
    c = rng.normal(size=n)
    res = simplex_standard(c, A, b)
    assert res.status in ("optimal", "unbounded")
    if res.optimal:
        assert np.all(res.x >= -1e-9)
        assert np.allclose(A @ res.x, b, atol=1e-7)
        assert res.value <= c @ x0 + 1e-7

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fitzkit.geometry import (
    DimensionMismatch,
    HalfspaceCone,
    PolyhedralCone,
    Polytope,
    cone_support_value,
    extreme_points,
    minkowski_membership,
    orthogonality_check,
    polar_cone,
    polytope_membership,
    support_value,
)

SQUARE = Polytope([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]])


def test_support_square():
    assert support_value(SQUARE, [1.0, 0.0]) == pytest.approx(1.0)


def test_support_single_vertex():
    assert support_value(Polytope([[2.0, 3.0]]), [1.0, 1.0]) == pytest.approx(5.0)


def test_support_segment():
    seg = Polytope([[-1.0, 0.0], [1.0, 0.0]])
    # enumerating both vertices: max(-0.5, 0.5)
    assert support_value(seg, [0.5, 7.0]) == pytest.approx(0.5)


def test_support_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        support_value(SQUARE, [1.0])


@settings(max_examples=100, deadline=None)
@given(st.randoms(use_true_random=False))
def test_support_sublinear(rnd):
    rng = np.random.default_rng(rnd.randrange(2**32))
    P = Polytope(rng.normal(size=(5, 3)))
    x = rng.normal(size=3)
    y = rng.normal(size=3)
    lam = rng.random() * 3.0
    assert support_value(P, x + y) <= support_value(P, x) + support_value(P, y) + 1e-9
    assert support_value(P, lam * x) == pytest.approx(lam * support_value(P, x), abs=1e-9)


def test_minkowski_membership_strip():
    K = Polytope([[0.0, 0.0], [1.0, 0.0]])
    C = PolyhedralCone([[0.0, 1.0]])
    assert minkowski_membership(K, C, [0.5, 2.0], 1e-9)
    assert not minkowski_membership(K, C, [2.0, 0.0], 1e-9)


def test_minkowski_membership_ray():
    K = Polytope([[0.0, 0.0]])
    C = PolyhedralCone([[1.0, 1.0]])
    # mu = 3 on the single generator
    assert minkowski_membership(K, C, [3.0, 3.0], 1e-9)
    assert not minkowski_membership(K, C, [3.0, 2.0], 1e-9)


def test_minkowski_membership_vertices():
    for v in SQUARE.vertices:
        assert minkowski_membership(SQUARE, PolyhedralCone.zero(2), v, 1e-9)


def test_minkowski_membership_halfspace_cone():
    K = Polytope([[0.0, 0.0]])
    H = HalfspaceCone([[0.0, 1.0]])  # {s : s2 <= 0}
    assert minkowski_membership(K, H, [5.0, -1.0], 1e-9)
    assert not minkowski_membership(K, H, [0.0, 0.5], 1e-9)


def test_polar_orthant():
    C = PolyhedralCone([[1.0, 0.0], [0.0, 1.0]])
    H = polar_cone(C)
    assert H.contains([-1.0, -2.0])
    assert not H.contains([0.1, -1.0])


def test_polar_trivial_cone_is_whole_space():
    H = polar_cone(PolyhedralCone.zero(2))
    assert H.contains([123.0, -9.0])


def test_polar_halfplane_matches_support():
    C = PolyhedralCone([[1.0, 1.0]])
    H = polar_cone(C)
    rng = np.random.default_rng(7)
    for _ in range(200):
        x = rng.normal(size=2) * 3
        sigma = cone_support_value(C, x)
        inside = H.contains(x)
        assert inside == (x[0] + x[1] <= 1e-9)
        # sigma_C = i_{C polar} pointwise
        assert (sigma == 0.0) == inside
        assert (sigma == math.inf) == (not inside)


def test_cone_support_trivial():
    assert cone_support_value(PolyhedralCone.zero(3), [1.0, 2.0, 3.0]) == 0.0


def test_orthogonality_axes():
    V = Polytope([[0.0, -1.0], [0.0, 1.0]])
    K = Polytope([[0.0, 0.0], [1.0, 0.0]])
    assert orthogonality_check(V, K)


def test_orthogonality_same_axis_fails():
    V = Polytope([[-1.0, 0.0], [1.0, 0.0]])
    K = Polytope([[0.0, 0.0], [1.0, 0.0]])
    assert not orthogonality_check(V, K)


def test_orthogonality_diagonal():
    V = Polytope([[1.0, 1.0], [-1.0, -1.0]])
    K = Polytope([[1.0, -1.0], [2.0, -2.0]])  # K - K spans (1, -1)
    assert orthogonality_check(V, K)


def test_polytope_membership_basic():
    assert polytope_membership(SQUARE, [0.3, -0.7])
    assert not polytope_membership(SQUARE, [1.2, 0.0])


def test_extreme_points_drops_interior_and_duplicates():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.25, 0.25], [1.0, 0.0]])
    ext = extreme_points(pts)
    assert ext.shape == (3, 2)
    assert not any(np.allclose(row, [0.25, 0.25]) for row in ext)

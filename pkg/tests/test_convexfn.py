import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fitzkit.convexfn import (
    AffineMax,
    Composite,
    FieldGrid,
    GridAxis,
    GridSampled,
    IndicatorPolyhedron,
    InvalidVKCSpec,
    SupportOfPolytope,
    VKCSpec,
    affine_max_conjugate_value,
    conjugate_grid,
    conjugate_vkc,
    eps_subgradient_test,
    eval_vkc,
    grid_from_csv,
    grid_from_json,
    grid_to_csv,
    grid_to_json,
    inf_convolution_grid,
    legendre_1d,
    sample_function_grid,
    subdifferential_affine_max,
    subdifferential_vkc,
    vkc_function,
)
from fitzkit.geometry import PolyhedralCone, Polytope

from helpers import abs_spec, brute_legendre, strip_spec

ABS = AffineMax([[1.0], [-1.0]], [0.0, 0.0])


# ---------------------------------------------------------------------------
# Evaluation


def test_eval_affine_max_abs():
    assert ABS([-3.0]) == pytest.approx(3.0)


def test_eval_indicator_strip():
    ind = IndicatorPolyhedron(Polytope([[0.0, 0.0], [1.0, 0.0]]), PolyhedralCone([[0.0, 1.0]]))
    assert ind([0.5, 2.0]) == 0.0
    assert ind([2.0, 0.0]) == math.inf


def test_eval_composite():
    f = Composite(ABS, tilt=[2.0], shift=1.0)
    assert f([1.0]) == pytest.approx(4.0)


def test_eval_vkc_strip():
    spec = strip_spec()
    assert eval_vkc(spec, [0.5, 2.0]) == pytest.approx(2.0)
    assert eval_vkc(spec, [2.0, 0.0]) == math.inf
    assert eval_vkc(spec, [0.0, 0.0]) == pytest.approx(0.0)
    assert eval_vkc(spec, [1.0, 0.0]) == pytest.approx(0.0)  # min on all of K


def test_eval_vkc_independent_of_xhat():
    base = strip_spec()
    other = VKCSpec(K=base.K, V=base.V, C=base.C, xhat=[1.0, 0.0], xbar_star=[0.0, 0.0], c=0.0)
    rng = np.random.default_rng(3)
    for _ in range(50):
        x = rng.uniform([-0.2, -0.2], [1.2, 3.0])
        assert eval_vkc(base, x) == pytest.approx(eval_vkc(other, x), abs=1e-9)


def test_vkc_invariants_enforced():
    with pytest.raises(InvalidVKCSpec):
        VKCSpec(  # 0 not in V
            K=Polytope([[0.0]]),
            V=Polytope([[1.0], [2.0]]),
            C=PolyhedralCone.zero(1),
            xhat=[0.0],
            xbar_star=[0.0],
        )
    with pytest.raises(InvalidVKCSpec):
        VKCSpec(  # V not orthogonal to K - K
            K=Polytope([[0.0, 0.0], [1.0, 0.0]]),
            V=Polytope([[-1.0, 0.0], [1.0, 0.0]]),
            C=PolyhedralCone.zero(2),
            xhat=[0.0, 0.0],
            xbar_star=[0.0, 0.0],
        )
    with pytest.raises(InvalidVKCSpec):
        VKCSpec(  # xhat outside K
            K=Polytope([[0.0]]),
            V=Polytope([[-1.0], [1.0]]),
            C=PolyhedralCone.zero(1),
            xhat=[1.0],
            xbar_star=[0.0],
        )


# ---------------------------------------------------------------------------
# Exact conjugation


def test_conjugate_vkc_strip_closed_form():
    fst = conjugate_vkc(strip_spec())
    rng = np.random.default_rng(11)
    for _ in range(300):
        s = rng.uniform([-3.0, -3.0], [3.0, 3.0])
        expected = max(0.0, s[0]) if s[1] <= 1.0 else math.inf
        got = fst(s)
        if math.isinf(expected):
            assert math.isinf(got)
        else:
            assert got == pytest.approx(expected, abs=1e-9)


def test_conjugate_vkc_abs_is_unit_ball_indicator():
    fst = conjugate_vkc(abs_spec())
    assert fst([0.5]) == pytest.approx(0.0)
    assert fst([1.0]) == pytest.approx(0.0)
    assert fst([1.5]) == math.inf


def test_conjugate_vkc_shift_rule():
    base = strip_spec()
    shifted = VKCSpec(K=base.K, V=base.V, C=base.C, xhat=base.xhat, xbar_star=base.xbar_star, c=5.0)
    f0 = conjugate_vkc(base)
    f5 = conjugate_vkc(shifted)
    for s in ([0.5, 0.5], [-1.0, 1.0], [2.0, -2.0]):
        assert f5(s) == pytest.approx(f0(s) - 5.0, abs=1e-12)


def test_conjugate_vkc_tilt_rule():
    base = abs_spec()
    tilted = VKCSpec(K=base.K, V=base.V, C=base.C, xhat=base.xhat, xbar_star=[0.25], c=0.0)
    fst = conjugate_vkc(tilted)
    # (|.| + 0.25 x)* = i_[-0.75, 1.25]
    assert fst([1.25]) == pytest.approx(0.0)
    assert fst([-0.75]) == pytest.approx(0.0)
    assert fst([1.3]) == math.inf


def test_fenchel_young_on_exact_pairs():
    f = vkc_function(strip_spec())
    fst = conjugate_vkc(strip_spec())
    rng = np.random.default_rng(5)
    for _ in range(200):
        x = rng.uniform([-0.5, -0.5], [1.5, 3.0])
        s = rng.uniform([-2.0, -2.0], [2.0, 1.5])
        fx, fs = f(x), fst(s)
        if math.isinf(fx) or math.isinf(fs):
            continue
        assert fx + fs >= float(x @ s) - 1e-9


# ---------------------------------------------------------------------------
# Grid conjugation


def test_conjugate_grid_parabola():
    f = GridSampled(sample_function_grid(lambda x: 0.5 * x[0] ** 2, [GridAxis(-4.0, 4.0, 401)]))
    fst = conjugate_grid(f, [GridAxis(-2.0, 2.0, 41)])
    assert fst([1.0]) == pytest.approx(0.5, abs=1e-3)
    assert fst([0.0]) == pytest.approx(0.0, abs=1e-3)


def test_conjugate_grid_abs_flags_divergence():
    f = GridSampled(sample_function_grid(lambda x: abs(x[0]), [GridAxis(-4.0, 4.0, 401)]))
    fst = conjugate_grid(f, [GridAxis(-2.0, 2.0, 41)])
    assert fst([0.5]) == pytest.approx(0.0, abs=1e-6)
    assert fst([1.0]) == pytest.approx(0.0, abs=1e-6)
    assert fst([1.5]) == math.inf


def test_conjugate_grid_point_indicator():
    f = GridSampled(sample_function_grid(lambda x: 0.0 if x[0] == 0.0 else math.inf, [GridAxis(-2.0, 2.0, 21)]))
    fst = conjugate_grid(f, [GridAxis(-3.0, 3.0, 31)])
    assert np.all(fst.grid.values == 0.0)


def test_legendre_1d_matches_dense_oracle():
    rng = np.random.default_rng(42)
    xs = np.linspace(-2.0, 2.0, 81)
    vals = np.abs(xs) + 0.3 * xs**2  # convex, slopes within [-3.2, 3.2] roughly
    duals = np.linspace(-1.0, 1.0, 33)
    out = legendre_1d(xs, vals, duals)
    for s, got in zip(duals, out):
        assert got == pytest.approx(brute_legendre(xs, vals, s), abs=1e-12)


def test_legendre_1d_nonconvex_input_uses_envelope():
    xs = np.linspace(-1.0, 1.0, 41)
    vals = -np.abs(xs)  # nonconvex; conjugate equals that of the convex envelope
    duals = np.linspace(-0.4, 0.4, 9)
    out = legendre_1d(xs, vals, duals)
    for s, got in zip(duals, out):
        assert got == pytest.approx(brute_legendre(xs, vals, s), abs=1e-12)


def test_biconjugation_reproduces_convex_grid():
    ax = GridAxis(-2.0, 2.0, 81)
    f = GridSampled(sample_function_grid(lambda x: 0.5 * x[0] ** 2, [ax]))
    fstar = conjugate_grid(f, [GridAxis(-2.5, 2.5, 101)])
    fss = conjugate_grid(fstar, [ax])
    pts = ax.points
    vals = fss.grid.values
    inner = np.abs(pts) <= 1.5  # away from slope truncation at the box edge
    err = np.max(np.abs(vals[inner] - 0.5 * pts[inner] ** 2))
    assert err <= 2.0 * ax.step * 2.0


def test_conjugate_grid_matches_exact_vkc_2d():
    spec = strip_spec()
    primal = [GridAxis(-1.0, 1.5, 51), GridAxis(-1.0, 4.0, 51)]
    dual = [GridAxis(-2.0, 2.0, 41), GridAxis(-2.0, 1.0, 31)]
    approx = conjugate_grid(vkc_function(spec), dual, primal_axes=primal)
    exact = conjugate_vkc(spec)
    step = max(a.step for a in primal)
    allowance = 2.0 * step * (1.0 + 2.0)
    for idx in np.ndindex(approx.grid.values.shape):
        s = approx.grid.node(idx)
        a = approx.grid.values[idx]
        e = exact(s)
        if math.isinf(e) or math.isinf(a):
            assert math.isinf(e) == math.isinf(a)
        else:
            assert abs(a - e) <= allowance


# ---------------------------------------------------------------------------
# Epsilon subgradients


def test_eps_subgradient_graph_point():
    fst = conjugate_vkc(abs_spec())
    f = vkc_function(abs_spec())
    assert eps_subgradient_test(f, fst, [2.0], [1.0], 0.0)


def test_eps_subgradient_gap_arithmetic():
    f = vkc_function(abs_spec())
    fst = conjugate_vkc(abs_spec())
    assert not eps_subgradient_test(f, fst, [2.0], [0.5], 0.0)
    assert eps_subgradient_test(f, fst, [2.0], [0.5], 1.0)  # gap = 2 + 0 - 1


def test_eps_subgradient_quadratic():
    ax = GridAxis(-3.0, 3.0, 121)
    f = GridSampled(sample_function_grid(lambda x: 0.5 * x[0] ** 2, [ax]))
    fst = conjugate_grid(f, [ax])
    assert eps_subgradient_test(f, fst, [1.0], [0.0], 0.5)  # gap exactly 0.5
    assert not eps_subgradient_test(f, fst, [1.0], [0.0], 0.4999)


def test_eps_subgradient_infinite_value_is_false():
    f = vkc_function(abs_spec())
    fst = conjugate_vkc(abs_spec())
    assert not eps_subgradient_test(f, fst, [1.0], [2.0], 10.0)  # f*(2) = +inf


# ---------------------------------------------------------------------------
# Subdifferentials


def test_subdifferential_abs_kink_and_smooth():
    at0 = subdifferential_affine_max(ABS, [0.0])
    assert sorted(v[0] for v in at0.vertices) == [-1.0, 1.0]
    assert at0.contains([0.3])
    assert not at0.contains([1.3])
    at3 = subdifferential_affine_max(ABS, [3.0])
    assert at3.vertices.shape == (1, 1)
    assert at3.vertices[0, 0] == pytest.approx(1.0)


def test_subdifferential_requires_domain_membership():
    dom = IndicatorPolyhedron(Polytope([[0.0]]), PolyhedralCone([[1.0]]))  # [0, inf)
    with pytest.raises(ValueError):
        subdifferential_affine_max(ABS, [-1.0], domain=dom)


def test_subdifferential_vkc_strip_interior_edge():
    spec = strip_spec()
    sub = subdifferential_vkc(spec, [0.5, 0.0])
    # conv{(0,-1), (0,1)} + normal cone {0} x (-inf, 0] = {0} x (-inf, 1]
    assert sub.contains([0.0, 1.0])
    assert sub.contains([0.0, -7.0])
    assert not sub.contains([0.0, 1.1])
    assert not sub.contains([0.1, 0.0])


def test_subdifferential_vkc_smooth_point():
    sub = subdifferential_vkc(strip_spec(), [0.5, 2.0])
    assert sub.vertices.shape == (1, 2)
    assert sub.vertices[0] == pytest.approx([0.0, 1.0])


def test_vkc_value_identity_from_subgradients():
    # f(x) = <x - xhat, x*> + min f for emitted subgradients, min f = 0
    spec = strip_spec()
    f = vkc_function(spec)
    rng = np.random.default_rng(9)
    for _ in range(60):
        x = rng.uniform([0.0, 0.0], [1.0, 3.0])
        sub = subdifferential_vkc(spec, x)
        for v in sub.vertices:
            assert f(x) == pytest.approx(float((x - spec.xhat) @ v), abs=1e-9)


def test_affine_max_conjugate_value():
    # |x|* = i_[-1,1]
    assert affine_max_conjugate_value(ABS, [0.3]) == pytest.approx(0.0)
    assert affine_max_conjugate_value(ABS, [1.0]) == pytest.approx(0.0)
    assert affine_max_conjugate_value(ABS, [1.01]) == math.inf


# ---------------------------------------------------------------------------
# Infimal convolution


def test_inf_convolution_identity_element():
    ax = GridAxis(-3.0, 3.0, 25)
    g = GridSampled(sample_function_grid(lambda x: abs(x[0]), [ax]))
    point = GridSampled(sample_function_grid(lambda x: 0.0 if x[0] == 0.0 else math.inf, [ax]))
    conv = inf_convolution_grid(point, g)
    assert np.array_equal(conv.grid.values, g.grid.values)


def test_inf_convolution_abs_with_ball():
    ax = GridAxis(-3.0, 3.0, 25)
    f = GridSampled(sample_function_grid(lambda x: abs(x[0]), [ax]))
    ball = GridSampled(sample_function_grid(lambda x: 0.0 if abs(x[0]) <= 1.0 else math.inf, [ax]))
    conv = inf_convolution_grid(f, ball)
    for x in ax.points:
        assert conv([x]) == pytest.approx(max(0.0, abs(x) - 1.0), abs=1e-12)


def test_inf_convolution_duality_identity():
    ax = GridAxis(-4.0, 4.0, 161)
    f = GridSampled(sample_function_grid(lambda x: 0.5 * x[0] ** 2, [ax]))
    conv = inf_convolution_grid(f, f)  # x^2 / 4
    dual = GridAxis(-1.0, 1.0, 41)
    lhs = conjugate_grid(conv, [dual])
    fstar = conjugate_grid(f, [dual])
    for i, s in enumerate(dual.points):
        assert lhs.grid.values[i] == pytest.approx(2.0 * fstar.grid.values[i], abs=5e-3)
        assert lhs.grid.values[i] == pytest.approx(s * s, abs=5e-3)


def test_inf_convolution_lattice_mismatch():
    a = GridSampled(sample_function_grid(lambda x: abs(x[0]), [GridAxis(-1.0, 1.0, 11)]))
    b = GridSampled(sample_function_grid(lambda x: abs(x[0]), [GridAxis(-1.0, 1.0, 21)]))
    with pytest.raises(ValueError):
        inf_convolution_grid(a, b)


# ---------------------------------------------------------------------------
# Convexity property and serialization


@settings(max_examples=60, deadline=None)
@given(st.randoms(use_true_random=False))
def test_affine_max_midpoint_convexity(rnd):
    rng = np.random.default_rng(rnd.randrange(2**32))
    f = AffineMax(rng.normal(size=(4, 2)), rng.normal(size=4))
    x = rng.normal(size=2)
    y = rng.normal(size=2)
    assert f(0.5 * (x + y)) <= 0.5 * (f(x) + f(y)) + 1e-9


def test_grid_json_roundtrip():
    grid = sample_function_grid(lambda x: 0.0 if abs(x[0]) <= 1 else math.inf, [GridAxis(-2.0, 2.0, 9)])
    back = grid_from_json(grid_to_json(grid))
    assert back.axes == grid.axes
    assert np.array_equal(back.values, grid.values)


def test_grid_csv_roundtrip():
    grid = sample_function_grid(lambda x: x[0] * x[1], [GridAxis(-1.0, 1.0, 5), GridAxis(0.0, 2.0, 3)])
    back = grid_from_csv(grid_to_csv(grid))
    assert back.axes == grid.axes
    assert np.array_equal(back.values, grid.values)


def test_field_grid_rejects_nan():
    with pytest.raises(ValueError):
        FieldGrid((GridAxis(0.0, 1.0, 2),), np.array([0.0, math.nan]))

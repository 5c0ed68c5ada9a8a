import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gammareg.core import AllInfinite, Box, SampledFunction, build_grid, linear
from gammareg.transform import (
    DimensionTooHigh,
    affine_minorant_at,
    conjugate,
    conjugate_fast,
    conjugate_lattice,
    conjugate_line,
    conjugate_naive,
    dual_grid,
    envelope_biconjugate,
    envelope_hull,
    envelope_tolerance,
    lower_hull,
    lsc_hull,
    slope_bounds,
)

from conftest import make, make_poly
from oracles import brute_conjugate, lp_envelope

values = st.floats(-50, 50, allow_nan=False)


def box_grid(lo, hi, res):
    return build_grid(Box(np.atleast_1d(np.asarray(lo, float)), np.atleast_1d(np.asarray(hi, float))), res)


def ulp4(h, dual):
    fin = h.finite
    scale = np.abs(dual.nodes @ np.abs(h.grid.nodes[fin]).max(axis=0)) + np.abs(h.values[fin]).max()
    return 4 * np.spacing(scale)


# -- conjugates ---------------------------------------------------------------


def test_conjugate_half_square_closed_form():
    h = make("x^2/2", -1, 1, 1000)
    dual = box_grid(-2.5, 2.5, 10)
    for hs in (conjugate_naive(h, dual), conjugate_fast(h, dual)):
        at = dict(zip(dual.nodes[:, 0].tolist(), hs.values.tolist()))
        assert at[0.5] == pytest.approx(0.125, abs=1e-15)
        assert at[2.0] == pytest.approx(1.5, abs=1e-15)
        # p^2/2 inside the slope range, |p| - 1/2 outside
        ref = np.where(np.abs(dual.nodes[:, 0]) <= 1, dual.nodes[:, 0] ** 2 / 2, np.abs(dual.nodes[:, 0]) - 0.5)
        assert np.abs(hs.values - ref).max() <= 1e-6


def test_conjugate_of_zero_is_support_function():
    h = make("0", 0, 1, 20)
    dual = box_grid(-3, 3, 12)
    assert np.array_equal(conjugate_fast(h, dual).values, np.maximum(0, dual.nodes[:, 0]))
    assert np.array_equal(conjugate_naive(h, dual).values, np.maximum(0, dual.nodes[:, 0]))


def test_conjugate_affine_cancels():
    h = make("1.5*x", -1, 1, 10)
    dual = box_grid(0.5, 2.5, 4)
    i = int(np.argmin(np.abs(dual.nodes[:, 0] - 1.5)))
    assert conjugate_naive(h, dual).values[i] == 0.0
    assert conjugate_fast(h, dual).values[i] == 0.0


def test_conjugate_skips_infinite_nodes():
    g = box_grid(0, 1, 4)
    h = SampledFunction(g, np.array([np.inf, 0.0, np.inf, 1.0, np.inf]))
    dual = box_grid(-1, 1, 4)
    ref = brute_conjugate(g.nodes, h.values, dual.nodes)
    assert np.array_equal(conjugate_naive(h, dual).values, ref)
    assert np.array_equal(conjugate_fast(h, dual).values, ref)


def test_conjugate_line_all_infinite():
    out = conjugate_line(np.arange(3.0), np.full(3, np.inf), np.array([0.0, 1.0]))
    assert np.all(out == -np.inf)


def test_separable_2d():
    h = make("x^2 + y^2", [-1, -1], [1, 1], 32)
    dual = box_grid([-3, -3], [3, 3], 24)
    h1 = make("x^2", -1, 1, 32)
    d1 = box_grid(-3, 3, 24)
    c1 = conjugate_naive(h1, d1).values
    ref = (c1[:, None] + c1[None, :]).ravel()
    assert np.abs(conjugate_fast(h, dual).values - ref).max() <= 1e-12
    assert np.abs(conjugate_naive(h, dual).values - ref).max() <= 1e-12


@given(st.integers(1, 7), st.integers(1, 7), st.integers(1, 6), st.integers(0, 2**31))
def test_conjugate_lattice_maximiser(n0, n1, m, seed):
    rng = np.random.default_rng(seed)
    f = rng.normal(size=(n0 + 1, n1 + 1))
    f[rng.random(f.shape) < 0.3] = np.inf
    f.flat[0] = 0.0
    xs = [np.linspace(-1, 1, n0 + 1), np.linspace(0, 2, n1 + 1)]
    ps = [np.linspace(-4, 4, m + 1), np.linspace(-3, 5, m + 2)]
    g, (i, j) = conjugate_lattice(f, xs, ps, return_index=True)
    P0, P1 = np.meshgrid(ps[0], ps[1], indexing="ij")
    at = P0 * xs[0][i] + P1 * xs[1][j] - f[i, j]
    ref = (P0[..., None, None] * xs[0][:, None] + P1[..., None, None] * xs[1][None, :] - f).max(axis=(2, 3))
    assert np.all(np.isfinite(f[i, j]))
    assert np.abs(at - ref).max() <= 1e-12
    assert np.abs(g - ref).max() <= 1e-12


def test_fast_equals_naive_bitwise_2d():
    rng = np.random.default_rng(3)
    h0 = make("0", [-1, -1], [1, 2], 40)
    h = h0.with_values(rng.normal(size=h0.grid.size) + h0.grid.nodes[:, 0] ** 2)
    dual = dual_grid(h, 30)
    assert np.array_equal(conjugate_fast(h, dual).values, conjugate_naive(h, dual).values)


@given(st.lists(values, min_size=3, max_size=60), st.integers(2, 40), st.integers(0, 2**31))
def test_fast_matches_naive_1d(vals, m, seed):
    g = box_grid(-1.3, 2.1, len(vals) - 1)
    rng = np.random.default_rng(seed)
    v = np.array(vals)
    v[rng.random(v.size) < 0.2] = np.inf
    if not np.isfinite(v).any():
        v[0] = 0.0
    h = SampledFunction(g, v)
    dual = box_grid(-100, 100, m)
    fast, naive = conjugate_fast(h, dual).values, conjugate_naive(h, dual).values
    assert np.all(np.abs(fast - naive) <= ulp4(h, dual))


@given(st.integers(2, 9), st.integers(2, 9), st.integers(0, 2**31))
def test_fast_matches_naive_on_triangle(r1, r2, seed):
    rng = np.random.default_rng(seed)
    h0 = make_poly("0", [[0, 0], [1, 0], [0.37, 0.81]], r1)
    h = h0.with_values(rng.normal(size=h0.grid.size))
    dual = box_grid([-5, -5], [5, 5], r2)
    fast, naive = conjugate_fast(h, dual).values, conjugate_naive(h, dual).values
    assert np.all(np.abs(fast - naive) <= ulp4(h, dual))
    assert np.allclose(naive, brute_conjugate(h.grid.nodes, h.values, dual.nodes), atol=1e-12)


def test_conjugate_naive_all_infinite_guard():
    with pytest.raises(AllInfinite):
        SampledFunction(box_grid(0, 1, 2), np.full(3, np.inf))


def test_conjugate_is_midpoint_convex():
    rng = np.random.default_rng(3)
    g = box_grid(-1, 1, 50)
    h = SampledFunction(g, rng.normal(size=g.size))
    hs = conjugate_naive(h, dual_grid(h)).values
    assert np.all(hs[:-2] + hs[2:] - 2 * hs[1:-1] >= -1e-9)


def test_conjugate_dispatch():
    h = make("x^2", -1, 1, 20)
    assert np.array_equal(conjugate(h, method="naive").values, conjugate_naive(h, dual_grid(h)).values)


# -- dual grid -----------------------------------------------------------------


def test_dual_grid_covers_slopes_with_padding():
    h = make("x^2", -1, 1, 10)
    lo, hi = slope_bounds(h)
    assert lo[0] == pytest.approx(-1.8) and hi[0] == pytest.approx(1.8)
    d = dual_grid(h, 20)
    assert d.domain.lower[0] < lo[0] and d.domain.upper[0] > hi[0]
    assert d.domain.upper[0] - hi[0] == pytest.approx(3.6 / 18)


def test_dual_grid_of_affine_data():
    d = dual_grid(make("2*x + 1", 0, 1, 4), 16)
    assert d.domain.lower[0] == 1.0 and d.domain.upper[0] == 3.0
    assert 2.0 in d.nodes[:, 0].tolist()


# -- envelopes -----------------------------------------------------------------


def test_envelope_hull_double_well(double_well):
    g = envelope_hull(double_well).values
    x = double_well.grid.nodes[:, 0]
    inner = np.abs(x) <= 1
    assert np.all(g[inner] == 0.0)
    assert np.array_equal(g[~inner], double_well.values[~inner])


def test_envelope_hull_affine_is_identity():
    h = make("2*x + 1", 0, 1, 50)
    assert np.array_equal(envelope_hull(h).values, h.values)
    h2 = make("2*x - y + 3", [0, 0], [1, 1], 10)
    assert np.array_equal(envelope_hull(h2).values, h2.values)


def test_envelope_hull_infinite_node_gets_hull_height():
    g = box_grid(0, 1, 4)
    h = SampledFunction(g, np.array([0.0, 1.0, np.inf, 3.0, 4.0]))
    env = envelope_hull(h).values
    assert env[2] == pytest.approx(2.0)


def test_envelope_hull_three_dims_rejected():
    h = make("x+y+z", [0, 0, 0], [1, 1, 1], 2)
    with pytest.raises(DimensionTooHigh):
        envelope_hull(h)


@given(st.lists(values, min_size=3, max_size=25))
def test_envelope_hull_matches_lp_1d(vals):
    g = box_grid(-1, 1, len(vals) - 1)
    h = SampledFunction(g, np.array(vals))
    env = envelope_hull(h).values
    ref = np.array([lp_envelope(g.nodes, h.values, x) for x in g.nodes])
    assert np.allclose(env, ref, atol=1e-7 * (1 + np.abs(vals).max()))


@given(st.integers(0, 2**31), st.integers(2, 5))
def test_envelope_hull_matches_lp_2d(seed, res):
    rng = np.random.default_rng(seed)
    g = box_grid([0, 0], [1, 2], res)
    h = SampledFunction(g, rng.normal(size=g.size))
    env = envelope_hull(h).values
    ref = np.array([lp_envelope(g.nodes, h.values, x) for x in g.nodes])
    assert np.allclose(env, ref, atol=1e-7)


@pytest.mark.parametrize(
    "expr, lo, hi, res",
    [
        ("(x^2-1)^2", -2, 2, 400),
        ("x^2", -1, 1, 100),
        ("if x == 0 then 1 else x^2", -1, 1, 100),
        ("x^2 - y^2", [-1, -1], [1, 1], 32),
    ],
)
def test_biconjugate_within_tolerance_of_hull(expr, lo, hi, res):
    h = make(expr, lo, hi, res)
    dual = dual_grid(h)
    bi = envelope_biconjugate(h, dual).values
    hull = envelope_hull(h).values
    assert np.abs(bi - hull).max() <= envelope_tolerance(h, dual)
    # the biconjugate is a minorant of the data
    assert np.all(bi <= h.values + 1e-9)


def test_spike_envelope_ignores_spike(spike):
    g = envelope_hull(spike).values
    x = spike.grid.nodes[:, 0]
    i = int(np.flatnonzero(x == 0.0)[0])
    assert g[i] < spike.values[i]
    assert np.abs(g - x**2).max() <= envelope_tolerance(spike)


def test_envelope_tolerance_double_well(double_well):
    assert envelope_tolerance(double_well, dual_grid(double_well, 1600)) <= 0.15


def test_envelope_on_triangle_matches_lp():
    rng = np.random.default_rng(1)
    h0 = make_poly("0", [[0, 0], [1, 0], [0.4, 0.9]], 5)
    h = h0.with_values(rng.normal(size=h0.grid.size))
    env = envelope_hull(h).values
    ref = np.array([lp_envelope(h.grid.nodes, h.values, x) for x in h.grid.nodes])
    assert np.allclose(env, ref, atol=1e-8)
    bi = envelope_biconjugate(h).values
    assert np.abs(bi - env).max() <= envelope_tolerance(h)


# -- tilt covariance -------------------------------------------------------------


@given(st.lists(values, min_size=3, max_size=30), st.floats(-20, 20), st.floats(-20, 20))
def test_envelope_commutes_with_affine_shift(vals, a, b):
    g = box_grid(-1, 1, len(vals) - 1)
    h = SampledFunction(g, np.array(vals))
    m = a * g.nodes[:, 0] + b
    lhs = envelope_hull(h.with_values(h.values - m)).values
    rhs = envelope_hull(h).values - m
    scale = 1 + np.abs(vals).max() + abs(a) + abs(b)
    assert np.abs(lhs - rhs).max() <= 1e-9 * scale


# -- lsc hull ----------------------------------------------------------------------


def test_lsc_hull_spike_to_zero():
    g = box_grid(0, 1, 10)
    v = np.zeros(g.size)
    v[5] = 1.0
    h = SampledFunction(g, v)
    assert np.all(lsc_hull(h).values == 0.0)
    assert np.all(lsc_hull(h, mode="ball").values == 0.0)


def test_lsc_hull_continuous_data():
    h = make("x^2", -1, 1, 20)
    assert np.array_equal(lsc_hull(h).values, h.values)
    ball = lsc_hull(h, mode="ball").values
    # neighbour closer to zero
    x = h.grid.nodes[:, 0]
    ref = np.minimum(np.minimum(np.roll(x, 1) ** 2, np.roll(x, -1) ** 2), x**2)
    ref[0], ref[-1] = min(x[0] ** 2, x[1] ** 2), min(x[-1] ** 2, x[-2] ** 2)
    assert np.allclose(ball, ref, atol=0)


def test_lsc_hull_ball_erodes_infinite_plateau():
    g = box_grid(0, 1, 6)
    h = SampledFunction(g, np.array([0.0, 1.0, np.inf, np.inf, np.inf, 2.0, 3.0]))
    ball = lsc_hull(h, mode="ball").values
    assert ball[2] == 1.0 and ball[4] == 2.0 and np.isinf(ball[3])
    # two-sided mode keeps the plateau
    assert np.isinf(lsc_hull(h).values[2:5]).all()


def test_lsc_hull_unknown_mode():
    with pytest.raises(ValueError):
        lsc_hull(make("x", 0, 1, 4), mode="nope")


@given(st.integers(0, 2**31), st.sampled_from(["two-sided", "ball"]))
def test_lsc_sandwich_and_infimum(seed, mode):
    rng = np.random.default_rng(seed)
    g = box_grid([0, 0], [1, 1], 6)
    h = SampledFunction(g, rng.normal(size=g.size))
    h0 = lsc_hull(h, mode=mode).values
    env = envelope_hull(h).values
    assert np.all(h0 <= h.values)
    assert h0.min() == h.values.min()
    if mode == "two-sided":
        # the envelope sits below every two-sided average of neighbours
        assert np.all(env <= h0 + 1e-12)


# -- affine minorants ----------------------------------------------------------------


@pytest.mark.parametrize("x", [-1.5, -0.5, 0.0, 1.0, 1.7])
def test_affine_minorant_touches_envelope(double_well, x):
    m = affine_minorant_at(double_well, [x])
    nodes = double_well.grid.nodes
    assert np.all(m(nodes) <= double_well.values + 1e-9)
    i = double_well.grid.node_index([x])
    assert m(nodes[i]) == pytest.approx(envelope_hull(double_well).values[i], abs=1e-12)


def test_lower_hull_is_memoised(double_well):
    assert lower_hull(double_well) is lower_hull(double_well)


def test_linear_tilt_conjugate_shift():
    # (h - p0 x)*(p) = h*(p + p0)
    h = make("(x^2-1)^2", -2, 2, 100)
    shifted = h.with_values(h.values - 0.25 * h.grid.nodes[:, 0])
    d = box_grid(-1, 1, 8)
    d2 = box_grid(-0.75, 1.25, 8)
    assert np.allclose(conjugate_naive(shifted, d).values, conjugate_naive(h, d2).values, atol=1e-12)
    assert linear([1.0]).intercept == 0.0

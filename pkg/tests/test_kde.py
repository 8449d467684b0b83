import statistics

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from forestdensity.errors import DegenerateColumnError
from forestdensity.kde import (Grid, GridFits, KernelSpec, bandwidth_bivariate, bandwidth_univariate,
                               eval_bivariate, eval_kde_at_point, eval_univariate, fit_bivariate,
                               fit_univariate, marginalize_bivariate, rescale_to_unit_cube, _robust_scale)

FLOOR = 1e-8


@pytest.mark.parametrize("family", ["epanechnikov", "boxcar"])
def test_kernel_is_a_density_on_its_support(family):
    K = KernelSpec(family)
    u = np.linspace(-3, 3, 2001)
    vals = K(u)
    assert np.all(vals >= 0)
    assert np.all(vals[np.abs(u) > 1] == 0)
    mass, _ = integrate.quad(lambda t: float(K(t)), -1, 1)
    assert mass == pytest.approx(1.0, abs=1e-6)


def test_grid_points():
    g = Grid(16)
    pts = g.points
    assert np.all(np.diff(pts) > 0)
    assert pts[0] > 0 and pts[-1] < 1
    assert g.cell_width == pytest.approx(1 / 16)
    assert np.allclose(np.diff(pts), 1 / 16)


def test_rescale_examples():
    data = np.array([[2.0, 0.0, -1.0], [4.0, 1.0, 0.0], [6.0, 0.5, 3.0]])
    scaled, amap = rescale_to_unit_cube(data)
    assert np.array_equal(scaled[:, 0], [0.0, 0.5, 1.0])
    assert np.array_equal(scaled[:, 1], data[:, 1])
    assert np.array_equal(scaled[:, 2], [0.0, 0.25, 1.0])
    assert np.allclose(amap.inverse(scaled), data)


def test_rescale_rejects_constant_column():
    data = np.array([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]])
    with pytest.raises(DegenerateColumnError, match="dimension 1"):
        rescale_to_unit_cube(data)


def _oracle_bandwidth(col, exponent):
    sd = statistics.stdev(col)
    q = statistics.quantiles(col, n=4, method="inclusive")
    return 1.06 * min(sd, (q[2] - q[0]) / 1.34) * len(col) ** exponent


def test_bandwidths_match_independent_formula():
    col = list(np.random.default_rng(0).normal(size=400))
    assert bandwidth_univariate(col, 2.0) == pytest.approx(_oracle_bandwidth(col, -1 / 5), rel=1e-12)
    assert bandwidth_bivariate(col, 2.0) == pytest.approx(_oracle_bandwidth(col, -1 / 6), rel=1e-12)


def test_bandwidth_unit_sd_branch():
    # uniform-like column: IQR/1.34 exceeds the standard deviation, so sd wins
    col = np.linspace(-1, 1, 400)
    col = col / np.std(col, ddof=1)
    assert bandwidth_univariate(col, 2.0) == pytest.approx(1.06 * 400 ** -0.2, rel=1e-12)
    assert bandwidth_univariate(col, 2.0) == pytest.approx(0.320, abs=1e-3)
    assert bandwidth_bivariate(col, 2.0) / 1.06 == pytest.approx(0.368, abs=1e-3)


def test_bandwidth_sample_size_scaling():
    rng = np.random.default_rng(1)
    small, large = rng.normal(size=400), rng.normal(size=400 * 64)
    # exponent arithmetic with the spread factor divided out
    r1 = (bandwidth_univariate(large[:400 * 32]) / _robust_scale(large[:400 * 32])) / \
         (bandwidth_univariate(small) / _robust_scale(small))
    r2 = (bandwidth_bivariate(large) / _robust_scale(large)) / (bandwidth_bivariate(small) / _robust_scale(small))
    assert r1 == pytest.approx(0.5, rel=1e-12)
    assert r2 == pytest.approx(0.5, rel=1e-12)


def test_bandwidth_beta_limit():
    col = np.random.default_rng(2).normal(size=300)
    assert bandwidth_bivariate(col, beta=1e12) == pytest.approx(1.06 * _robust_scale(col), rel=1e-9)


def test_bandwidth_degenerate():
    with pytest.raises(DegenerateColumnError):
        bandwidth_univariate(np.ones(10), dim=3)


@settings(max_examples=30, deadline=None)
@given(st.integers(5, 200), st.integers(2, 10))
def test_bandwidth_monotone_in_n(n, factor):
    col = np.random.default_rng(n).normal(size=n)
    big = np.tile(col, factor)
    # same spread factor, more samples
    assert bandwidth_univariate(big) / _robust_scale(big) < bandwidth_univariate(col) / _robust_scale(col)
    assert bandwidth_bivariate(big) / _robust_scale(big) < bandwidth_bivariate(col) / _robust_scale(col)


def test_boxcar_point_mass():
    g = Grid(128)
    kde = fit_univariate(np.full(50, 0.5), "boxcar", g, 0.1, FLOOR)
    near = np.abs(g.points - 0.5) < 0.1
    assert np.allclose(kde.values[near], 5.0)
    assert np.all(kde.values[~near] == FLOOR)


def test_flat_limit():
    g = Grid(64)
    data = (np.arange(2000) + 0.5) / 2000
    kde = fit_univariate(data, "epanechnikov", g, 0.1, FLOOR)
    interior = (g.points > 0.15) & (g.points < 0.85)
    assert np.allclose(kde.values[interior], 1.0, atol=1e-3)


def test_single_point_epanechnikov_shape():
    g = Grid(128)
    h = 0.2
    kde = fit_univariate(np.array([0.5]), "epanechnikov", g, h, 0.0)
    u = (0.5 - g.points) / h
    expected = np.where(np.abs(u) <= 1, 0.75 * (1 - u ** 2) / h, 0.0)
    assert np.allclose(kde.values, expected, rtol=1e-14, atol=0)


def test_bivariate_single_point_boxcar():
    g = Grid(128)
    biv = fit_bivariate(np.array([0.5]), np.array([0.5]), "boxcar", g, 0.1, 0.1, FLOOR)
    near = np.abs(g.points - 0.5) < 0.1
    box = np.outer(near, near)
    assert np.allclose(biv.values[box], 25.0)
    assert np.all(biv.values[~box] == FLOOR)


def _naive_bivariate(xi, xj, kernel, grid, hi, hj):
    K = KernelSpec(kernel)
    pts = grid.points
    out = np.zeros((grid.m, grid.m))
    for k in range(grid.m):
        for l in range(grid.m):
            total = 0.0
            for s in range(len(xi)):
                total += K((xi[s] - pts[k]) / hi) * K((xj[s] - pts[l]) / hj) / (hi * hj)
            out[k, l] = total / len(xi)
    return out


@pytest.mark.parametrize("seed", range(10))
def test_factorized_bivariate_equals_double_sum(seed):
    rng = np.random.default_rng(seed)
    xi, xj = rng.random(25), rng.random(25)
    g = Grid(12)
    biv = fit_bivariate(xi, xj, "epanechnikov", g, 0.3, 0.25, 0.0)
    naive = _naive_bivariate(xi, xj, "epanechnikov", g, 0.3, 0.25)
    assert np.allclose(biv.values, naive, rtol=1e-10, atol=1e-14)


def test_product_design_is_separable():
    a = np.array([0.2, 0.35, 0.5, 0.7])
    b = np.array([0.3, 0.45, 0.6])
    xi, xj = np.repeat(a, len(b)), np.tile(b, len(a))
    g, h = Grid(32), 0.15
    biv = fit_bivariate(xi, xj, "epanechnikov", g, h, h, 0.0)
    ui = fit_univariate(a, "epanechnikov", g, h, 0.0)
    uj = fit_univariate(b, "epanechnikov", g, h, 0.0)
    assert np.allclose(biv.values, np.outer(ui.values, uj.values), rtol=1e-12, atol=1e-14)


def test_marginalize_examples():
    g = Grid(16)
    biv = fit_bivariate(np.array([0.5]), np.array([0.5]), "boxcar", g, 0.1, 0.1, FLOOR)
    biv.values = np.ones((16, 16))
    assert np.allclose(marginalize_bivariate(biv, 0), 1.0)
    rng = np.random.default_rng(0)
    u, v = rng.random(16) + 0.5, rng.random(16) + 0.5
    v = v / v.mean()
    biv.values = np.outer(u, v)
    assert np.allclose(marginalize_bivariate(biv, 0), u, rtol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_marginalize_conserves_mass(seed):
    rng = np.random.default_rng(seed)
    g = Grid(64)
    biv = fit_bivariate(rng.random(300), rng.random(300), "epanechnikov", g, 0.1, 0.12, FLOOR)
    for keep in (0, 1):
        assert marginalize_bivariate(biv, keep).mean() == pytest.approx(biv.values.mean(), abs=1e-9)


def test_eval_at_grid_point_matches_fit():
    rng = np.random.default_rng(3)
    x = rng.random(200)
    y = rng.random(200)
    g = Grid(128)
    uni = fit_univariate(x, "epanechnikov", g, 0.08, FLOOR)
    vals = eval_univariate(x, 0.08, "epanechnikov", g.points, FLOOR)
    assert np.max(np.abs(vals - uni.values)) <= 1e-12
    assert eval_kde_at_point(x, 0.08, "epanechnikov", g.points[40], FLOOR) == pytest.approx(uni.values[40], abs=1e-12)
    biv = fit_bivariate(x, y, "epanechnikov", g, 0.1, 0.09, FLOOR)
    K, L = np.meshgrid(np.arange(128), np.arange(128), indexing="ij")
    pts = eval_bivariate(x, y, 0.1, 0.09, "epanechnikov", g.points[K.ravel()], g.points[L.ravel()], FLOOR)
    assert np.allclose(pts.reshape(128, 128), biv.values, rtol=1e-12, atol=1e-12)


def test_eval_outside_support_and_boxcar_count():
    x = np.array([0.1, 0.2, 0.25, 0.9])
    assert eval_kde_at_point(x, 0.05, "boxcar", 0.55, FLOOR) == FLOOR
    # window [0.175, 0.275] catches 0.2 and 0.25
    assert eval_kde_at_point(x, 0.05, "boxcar", 0.225, FLOOR) == pytest.approx(2 / (4 * 2 * 0.05))
    pair = np.column_stack([x, x])
    assert eval_kde_at_point(pair, (0.05, 0.05), "boxcar", [0.225, 0.225], FLOOR) == pytest.approx(2 / (4 * 0.01))
    with pytest.raises(ValueError):
        eval_kde_at_point(x, 0.05, "boxcar", 1.5)


@pytest.mark.parametrize("seed", range(3))
def test_floor_and_mass_invariants(seed):
    rng = np.random.default_rng(seed)
    data = 0.2 + 0.6 * rng.random((400, 3))
    fits = GridFits(data, Grid(128), KernelSpec(), 2.0, FLOOR)
    for uni in fits.univariate:
        assert np.all(np.isfinite(uni.values)) and np.all(uni.values >= FLOOR)
        assert abs(uni.values.mean() - 1) <= 0.05
    biv = fits.bivariate(0, 2)
    assert np.all(np.isfinite(biv.values)) and np.all(biv.values >= FLOOR)
    assert abs(biv.values.mean() - 1) <= 0.05


def test_gridfits_rejects_unscaled_data():
    with pytest.raises(ValueError):
        GridFits(np.array([[0.0, 2.0]] * 5), Grid(8), KernelSpec(), 2.0, FLOOR)

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.polynomial import chebyshev as npcheb

from cheb2relu import chebyshev as cheb
from cheb2relu.chebyshev import ChebSeries
from cheb2relu.errors import DataError, ParameterError, StructuralError

seeds = st.integers(0, 2**31 - 1)


def vandermonde_oracle(values, p):
    x = np.cos(np.arange(p + 1) * np.pi / p)
    return np.linalg.lstsq(npcheb.chebvander(x, p), values, rcond=None)[0]


def test_eval_examples(rng):
    assert cheb.cheb_eval(ChebSeries([0, 0, 1]), 0.5) == pytest.approx(-0.5)
    assert cheb.cheb_eval(ChebSeries([0, 0, 0, 1]), 0.5) == pytest.approx(-1.0)
    x = rng.uniform(-1, 1, 100)
    t2, t4 = cheb.chebyshev_t(2, x), cheb.chebyshev_t(4, x)
    assert np.abs(t4 - (2 * t2 * t2 - 1)).max() <= 1e-13


def test_mapped_evaluation():
    s = ChebSeries([0, 1], (0.0, 2.0))
    assert s(2.0) == 1.0 and s(0.0) == -1.0 and s(1.0) == 0.0
    assert s.endpoint_values() == (-1.0, 1.0)
    assert s.derivative().coeffs.tolist() == [1.0]


def test_cc_grid_examples():
    assert cheb.cc_grid(2).points.tolist() == [1.0, 0.0, -1.0]
    assert cheb.cc_grid(1, (0.0, 1.0)).points.tolist() == [1.0, 0.0]
    assert cheb.cc_grid(4).points[1] == pytest.approx(math.sqrt(2) / 2, abs=1e-15)


@given(st.integers(1, 80), st.floats(-5, 5), st.floats(0.01, 10))
def test_cc_grid_invariants(p, a, width):
    b = a + width
    pts = cheb.cc_grid(p, (a, b)).points
    assert pts.size == p + 1 and pts[0] == b and pts[-1] == a
    assert np.all(np.diff(pts) < 0)


def test_cc_grid_rejects_degree_zero():
    with pytest.raises(ParameterError):
        cheb.cc_grid(0)
    with pytest.raises(ParameterError):
        cheb.cc_grid(3, (1.0, 1.0))


def test_interpolate_examples():
    grid = cheb.cc_grid(3)
    c = cheb.cc_interpolate(cheb.chebyshev_t(3, grid.points), grid).coeffs
    assert np.allclose(c, [0, 0, 0, 1], atol=1e-15)
    assert np.allclose(cheb.cc_interpolate(np.full(5, 2.5), cheb.cc_grid(4)).coeffs, [2.5, 0, 0, 0, 0])


def test_interpolate_length_mismatch():
    with pytest.raises(StructuralError):
        cheb.cc_interpolate([1.0, 2.0], cheb.cc_grid(3))


def test_non_finite_samples():
    with pytest.raises(DataError):
        cheb.cc_coefficients([1.0, np.nan, 0.0])
    with pytest.raises(DataError):
        cheb.interpolate(lambda x: np.where(x == 0, np.inf, x), 2)


def test_degree_16_against_least_squares(rng):
    c = rng.normal(size=17)
    p = 32
    vals = npcheb.chebval(cheb.cc_grid(p).points, c)
    got = cheb.cc_coefficients(vals)
    assert np.abs(got - vandermonde_oracle(vals, p)).max() <= 1e-10 * np.abs(c).max()
    assert np.abs(got[:17] - c).max() <= 1e-12


@given(seeds)
def test_projection_property(seed):
    rng = np.random.default_rng(seed)
    p = int(rng.integers(1, 40))
    c = rng.normal(size=p + 1)
    s = ChebSeries(c, (-0.3, 2.0))
    back = cheb.interpolate(s, p, s.interval).coeffs
    assert np.abs(back - c).max() <= 1e-10 * max(1.0, np.abs(c).max())


@given(seeds)
def test_interpolant_matches_samples(seed):
    rng = np.random.default_rng(seed)
    p = int(rng.integers(1, 50))
    vals = rng.normal(size=p + 1)
    grid = cheb.cc_grid(p, (1.0, 3.0))
    s = cheb.cc_interpolate(vals, grid)
    assert np.abs(s(grid.points) - vals).max() <= 1e-10 * max(1.0, np.abs(vals).max())


@pytest.mark.parametrize("p", [1, 2, 5, 10, 20])
def test_aliasing(p):
    grid = cheb.cc_grid(p)
    vals = cheb.chebyshev_t(p + 1, grid.points)
    got = cheb.cc_interpolate(vals, grid).coeffs
    expect = np.zeros(p + 1)
    expect[abs(p - 1)] = 1.0
    assert np.abs(got - expect).max() <= 1e-12
    assert np.abs(got - vandermonde_oracle(vals, p)).max() <= 1e-10


def test_lebesgue_examples():
    assert cheb.lebesgue_constant(1) == pytest.approx(1.0)
    assert cheb.lebesgue_constant(2) == pytest.approx(1.25, abs=1e-6)
    with pytest.raises(ParameterError):
        cheb.lebesgue_constant(0)


@pytest.mark.parametrize("p", [3, 10, 50, 100])
def test_lebesgue_bound(p):
    assert cheb.lebesgue_constant(p) <= cheb.lebesgue_bound(p)


def test_tail_sum_examples():
    for p in (2, 5, 9):
        t = ChebSeries(np.eye(p + 1)[p])
        assert cheb.coeff_tail_sum(t) == 1.0 <= p**4 * cheb.sup_norm_estimate(t)
    assert cheb.coeff_tail_sum(ChebSeries([3.0, -2.0])) == 0.0


@given(seeds)
def test_coefficient_stability(seed):
    rng = np.random.default_rng(seed)
    p = int(rng.integers(2, 33))
    s = ChebSeries(rng.normal(size=p + 1))
    assert cheb.coeff_tail_sum(s) <= p**4 * cheb.sup_norm_estimate(s)


@given(seeds)
def test_markov_inequality(seed):
    rng = np.random.default_rng(seed)
    p = int(rng.integers(1, 21))
    s = ChebSeries(rng.normal(size=p + 1))
    assert cheb.sup_norm_estimate(s.derivative()) <= p**2 * cheb.sup_norm_estimate(s) * (1 + 1e-6)


@given(seeds)
def test_inverse_inequality_l2_to_linf(seed):
    rng = np.random.default_rng(seed)
    p = int(rng.integers(1, 21))
    s = ChebSeries(rng.normal(size=p + 1))
    x, w = np.polynomial.legendre.leggauss(p + 2)
    l2 = math.sqrt(np.dot(w, s(x) ** 2))
    assert cheb.sup_norm_estimate(s) <= math.sqrt(3 * p**2) * l2


def test_coeff_csv_round_trip(tmp_path):
    s = ChebSeries([0.1, -2.0 / 3.0, 1e-17], (0.25, 0.5))
    path = tmp_path / "c.csv"
    cheb.write_coeffs_csv(s, path)
    assert path.read_text().splitlines()[0] == "cheb_coeffs,a,b"
    back = cheb.read_coeffs_csv(path)
    assert np.array_equal(back.coeffs, s.coeffs) and back.interval == s.interval


def test_coeff_csv_errors(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n1,2\n")
    with pytest.raises(DataError):
        cheb.read_coeffs_csv(bad)
    bad.write_text("cheb_coeffs,a,b\nfoo,0,1\n")
    with pytest.raises(DataError):
        cheb.read_coeffs_csv(bad)
    with pytest.raises(DataError):
        cheb.read_column_csv(bad, "value")


def test_empty_series_rejected():
    with pytest.raises(StructuralError):
        ChebSeries([])
    with pytest.raises(ParameterError):
        ChebSeries([1.0], (1.0, 0.0))

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cheb2relu import chebyshev as cheb
from cheb2relu.chebyshev import ChebSeries
from cheb2relu.emulator import (
    basis_columns,
    build_cheb_tower,
    build_interval_emulator,
    build_poly_emulator,
    clamp_net,
    interval_emulator_bounds,
    interval_tau,
    nonzero_coefficient_count,
    poly_emulator_bounds,
    theta,
    tower_bounds,
)
from cheb2relu.errors import ParameterError, StructuralError
from cheb2relu.nn_core import realize, realize_two_sided

GRID = np.linspace(-1.0, 1.0, 8193)


def w1inf_error(net, column, series, x=GRID):
    """Grid W^{1,inf} error of one output column against a series, both one-sided derivatives."""
    vals, right, left = realize_two_sided(net, x)
    d = series.derivative()
    e0 = np.abs(vals[:, column] - series(x)).max()
    e1 = max(np.abs(right[:-1, column] - d(x[:-1])).max(), np.abs(left[1:, column] - d(x[1:])).max())
    return e0, e1


def tower_grid(k):
    return np.unique(np.concatenate([GRID, cheb.cc_reference_points(2**k)]))


def test_level_one_tower():
    net = build_cheb_tower(1, 1e-3)
    x = tower_grid(1)
    assert np.array_equal(realize(net, x)[:, 1], x)
    e0, e1 = w1inf_error(net, 2, ChebSeries([0, 0, 1]), x)
    assert max(e0, e1) <= 1e-3


@pytest.mark.parametrize("k,delta", [(2, 1e-2), (3, 1e-2), (4, 1e-4)])
def test_tower_errors(k, delta):
    net = build_cheb_tower(k, delta)
    assert net.output_dim == 2 ** (k - 1) + 2
    x = tower_grid(k)
    for j, ell in enumerate(range(2 ** (k - 1), 2**k + 1), start=1):
        e0, e1 = w1inf_error(net, j, ChebSeries(np.eye(ell + 1)[ell]), x)
        assert max(e0, e1) <= delta


def test_tower_endpoints_exact():
    k = 3
    net = build_cheb_tower(k, 1e-2)
    ends = realize(net, np.array([-1.0, 1.0]))
    ells = np.arange(2 ** (k - 1), 2**k + 1)
    assert np.abs(ends[1, 1:] - 1.0).max() <= 1e-12
    assert np.abs(ends[0, 1:] - (-1.0) ** ells).max() <= 1e-12


@pytest.mark.parametrize("k", range(1, 7))
@pytest.mark.parametrize("delta", [1e-1, 1e-3, 1e-5, 1e-8])
def test_tower_size_ledger(k, delta):
    checks = tower_bounds(k, delta).check(build_cheb_tower(k, delta).metrics)
    assert all(ok for _, _, ok in checks.values()), checks


def test_halving_delta_does_not_increase_error():
    k = 3
    x = tower_grid(k)
    series = ChebSeries(np.eye(9)[8])
    errs = [max(w1inf_error(build_cheb_tower(k, d), 5, series, x)) for d in (1e-2, 5e-3, 2.5e-3)]
    assert errs[0] >= errs[1] >= errs[2]


def test_theta_schedule():
    assert theta(1, 1.0) == 2.0**-6 and theta(3, 0.5) == 2.0**-11


def test_tower_parameter_errors():
    with pytest.raises(ParameterError):
        build_cheb_tower(0, 1e-2)
    with pytest.raises(ParameterError):
        build_cheb_tower(2, 1.5)


def test_degree_one_is_affine():
    net = build_poly_emulator([ChebSeries([0, 1])], 1e-3)
    assert net.depth == 1
    assert np.abs(realize(net, GRID)[:, 0] - GRID).max() == 0.0


def test_constant_via_bias():
    net = build_poly_emulator([ChebSeries([1.0, 0.0, 0.0])], 1e-3)
    assert np.all(realize(net, GRID)[:, 0] == 1.0)


def test_random_degree_16_polys(rng):
    tau = 1e-5
    polys = [ChebSeries(rng.normal(size=17)) for _ in range(3)]
    net = build_poly_emulator(polys, tau)
    c_s = max(cheb.coeff_tail_sum(s) for s in polys)
    for i, s in enumerate(polys):
        e0, e1 = w1inf_error(net, i, s)
        assert max(e0, e1) <= tau * c_s
        ends = realize(net, np.array([-1.0, 1.0]))[:, i]
        assert np.abs(ends - np.array(s.endpoint_values())).max() <= 1e-12
    c_n = nonzero_coefficient_count(polys)
    m = net.metrics
    assert m.size_last <= 2 * c_n
    checks = poly_emulator_bounds(16, tau, c_n).check(m)
    assert all(ok for _, _, ok in checks.values()), checks


@settings(max_examples=10)
@given(st.integers(0, 2**31 - 1))
def test_hidden_layers_independent_of_coefficients(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 12))
    a = build_poly_emulator([ChebSeries(rng.normal(size=n + 1)) for _ in range(2)], 1e-4)
    b = build_poly_emulator([ChebSeries(rng.normal(size=n + 1)) for _ in range(2)], 1e-4)
    assert all(x.same_as(y) for x, y in zip(a.hidden_layers(), b.hidden_layers()))
    assert not a.layers[-1].same_as(b.layers[-1])


def test_basis_columns_select_chebyshev_outputs():
    n, tau = 8, 1e-4
    poly = build_poly_emulator([ChebSeries(np.eye(n + 1)[n])], tau)
    cols = basis_columns(n, tau)
    assert len(cols) == n + 1
    basis_last = poly.layers[-1].weights.tocoo()
    assert set(basis_last.col) <= {cols[n], cols[n] + poly.layers[-1].cols // 2}


def test_poly_emulator_needs_input():
    with pytest.raises(StructuralError):
        build_poly_emulator([], 1e-3)


def test_clamp_values():
    net = clamp_net(0.0, 1.0)
    assert realize(net, np.array([-0.5, 0.5, 2.0]))[:, 0].tolist() == [-1.0, 0.0, 1.0]
    with pytest.raises(ParameterError):
        clamp_net(1.0, 0.0)


def test_interval_emulator_outside_interval():
    net = build_interval_emulator([ChebSeries([0, 0, 1], (0.0, 1.0))], 1e-3)
    assert abs(realize(net, -5.0)[0] - 1.0) <= 1e-12
    assert abs(realize(net, 7.0)[0] - 1.0) <= 1e-12


def test_interval_emulator_square():
    eps = 1e-4
    net = build_interval_emulator([ChebSeries([0.5, 0.0, 0.5])], eps)
    assert np.abs(realize(net, GRID)[:, 0] - GRID**2).max() <= 2 * eps


def test_random_degree_8_on_subinterval(rng):
    eps, (a, b) = 1e-4, (0.25, 0.5)
    s = ChebSeries(rng.normal(size=9), (a, b))
    net = build_interval_emulator([s], eps)
    x = np.linspace(a, b, 8193)
    err = np.abs(realize(net, x)[:, 0] - s(x)).max()
    semi = np.abs(s.derivative()(x)).max()
    h = b - a
    assert (2 / h) * err <= eps * (2 / h) * semi
    checks = interval_emulator_bounds(8, eps, 9).check(net.metrics)
    assert all(ok for _, _, ok in checks.values()), checks


def test_interval_emulator_requires_common_interval():
    with pytest.raises(StructuralError):
        build_interval_emulator([ChebSeries([0, 1], (0, 1)), ChebSeries([0, 1], (0, 2))], 1e-3)
    with pytest.raises(ParameterError):
        build_interval_emulator([ChebSeries([0, 1])], 2.0)


def test_interval_tau():
    assert interval_tau(1e-3, 2) == pytest.approx(1e-3 / (8 * 64))


@settings(max_examples=8)
@given(st.integers(0, 2**31 - 1))
def test_relative_accuracy_chain(seed):
    rng = np.random.default_rng(seed)
    p = int(rng.integers(2, 17))
    g = ChebSeries(rng.normal(size=p + 1))
    g = ChebSeries(g.coeffs / cheb.sup_norm_estimate(g))
    eps_rel = 1e-3
    net = build_poly_emulator([g], eps_rel / p**4)
    assert np.abs(realize(net, GRID)[:, 0] - g(GRID)).max() <= eps_rel

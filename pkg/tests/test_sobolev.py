import json
import math

import numpy as np
import pytest

from cheb2relu import splines
from cheb2relu.calculus import identity_net
from cheb2relu.chebyshev import ChebSeries
from cheb2relu.emulator import build_interval_emulator
from cheb2relu.errors import DataError, ParameterError
from cheb2relu.nn_core import realize, realize_with_derivative
from cheb2relu.sobolev import (
    ALL_NORMS,
    ErrorReport,
    diff_norms,
    element_diff_norms,
    function_norms,
    norm_tags,
    singular_diff_norms,
)
from cheb2relu.splines import Mesh
from cheb2relu.studies import GeometricMeshSpec, geometric_mesh

from conftest import random_sparse_net


def net_as_function(net):
    return (lambda x: realize(net, np.asarray(x).reshape(-1))[:, 0],
            lambda x: realize_with_derivative(net, np.asarray(x).reshape(-1))[1][:, 0])


def test_self_difference_is_zero(rng):
    net = random_sparse_net(rng, [1, 6, 6, 1])
    f, df = net_as_function(net)
    rep = diff_norms(f, df, net, Mesh.uniform(-1, 1, 3, 1), grid=513)
    assert all(e.value <= 1e-13 for e in rep.entries.values())


def test_identity_has_zero_h1_error():
    rep = diff_norms(lambda x: x, np.ones_like, identity_net(1, 3), [-1.0, 0.5, 2.0])
    assert rep.value("H1_semi") == 0.0 and rep.value("L2") == 0.0


def test_square_interval_emulator():
    eps = 1e-4
    net = build_interval_emulator([ChebSeries([0.5, 0.0, 0.5])], eps)
    rep = diff_norms(lambda x: x * x, lambda x: 2 * x, net, [-1.0, 1.0], {"Linf"})
    assert rep.value("Linf") <= eps * 2.0


def test_closed_form_singular_seminorm():
    rep = singular_diff_norms(0.75, None, [0.0, 1.0], {"H1_semi", "L2"})
    assert rep.value("H1_semi") == pytest.approx(math.sqrt(1.125), rel=1e-8)
    assert rep.value("L2") == pytest.approx(math.sqrt(1 / 2.5), rel=1e-8)


def test_graded_versus_uniform_panels():
    alpha = 0.6
    exact = math.sqrt(alpha**2 / (2 * alpha - 1))
    uniform = diff_norms(lambda x: x**alpha, lambda x: alpha * x ** (alpha - 1), None, [0.0, 1.0],
                         {"H1_semi"}, panels=2).value("H1_semi")
    graded = singular_diff_norms(alpha, None, [0.0, 1.0], {"H1_semi"}, levels=40).value("H1_semi")
    assert abs(uniform / exact - 1) > 1e-2
    assert abs(graded / exact - 1) < 1e-6


def test_hp_interpolant_exact_at_nodes():
    mesh = geometric_mesh(GeometricMeshSpec(0.5, 5))
    v = splines.sample_to_spline(lambda x: x**0.6, mesh)
    net = splines.build_spline_emulator(v, 1e-2)
    assert np.abs(realize(net, mesh.nodes)[:, 0] - mesh.nodes**0.6).max() <= 1e-12
    rep = singular_diff_norms(0.6, net, mesh, {"L2", "H1_semi", "Linf"}, grid=257)
    assert np.all(np.isfinite([e.value for e in rep.entries.values()]))


def test_singular_parameter_checks():
    with pytest.raises(ParameterError):
        singular_diff_norms(0.0, None, [0.0, 1.0])
    with pytest.raises(ParameterError):
        singular_diff_norms(0.5, None, [0.1, 1.0])
    with pytest.warns(RuntimeWarning, match="infinite"):
        singular_diff_norms(0.4, None, [0.0, 1.0], {"H1_semi"})


def test_non_finite_values_name_the_node():
    f = lambda x: np.where(x > 0.5, np.nan, x)
    with pytest.raises(DataError, match="x = "):
        diff_norms(f, np.ones_like, None, [0.0, 1.0], {"L2"})


def test_unknown_norm_tag():
    with pytest.raises(ParameterError):
        diff_norms(np.sin, np.cos, None, [0.0, 1.0], {"H2"})


def test_norm_tags():
    assert norm_tags(1) == ("L1", "W1_1")
    assert norm_tags(2) == ("L2", "H1_semi")
    assert norm_tags(math.inf) == ("Linf", "W1_inf")
    with pytest.raises(ParameterError):
        norm_tags(3)


@pytest.fixture(scope="module")
def emulated_case():
    rng = np.random.default_rng(11)
    mesh = Mesh(np.r_[0.0, np.sort(rng.uniform(0, 1, 3)), 1.0], [3, 5, 2, 6])
    v = splines.sample_to_spline(lambda x: np.sin(4 * x) + x**3, mesh)
    return v, splines.cpwl_interpolant_net(v)


def test_quadrature_self_consistency(emulated_case):
    v, net = emulated_case
    tags = {"L1", "L2", "W1_1", "H1_semi"}
    coarse = diff_norms(v, v.derivative, net, v.mesh, tags)
    fine = diff_norms(v, v.derivative, net, v.mesh, tags, panels=128)
    for tag in tags:
        assert abs(coarse.value(tag) - fine.value(tag)) <= 1e-6 * fine.value(tag)


def test_norm_sanity(emulated_case):
    v, net = emulated_case
    rep = diff_norms(v, v.derivative, net, v.mesh)
    length = v.mesh.nodes[-1] - v.mesh.nodes[0]
    assert rep.value("L2") <= rep.value("Linf") * math.sqrt(length) * (1 + 1e-3)
    assert rep.value("L1") <= rep.value("L2") * math.sqrt(length) * (1 + 1e-9)


def test_poincare_step(emulated_case):
    v, net = emulated_case
    per = element_diff_norms(v, v.derivative, net, v.mesh, ALL_NORMS, grid=2049)
    h = v.mesh.widths
    for lp, semi in (("L1", "W1_1"), ("L2", "H1_semi"), ("Linf", "W1_inf")):
        assert np.all(per[lp] <= h * per[semi] * 1.05)


def test_function_norms():
    rep = function_norms(np.sin, np.cos, [0.0, math.pi])
    assert rep.value("L1") == pytest.approx(2.0, rel=1e-12)
    assert rep.value("H1_semi") == pytest.approx(math.sqrt(math.pi / 2), rel=1e-12)


def test_report_json(tmp_path):
    rep = ErrorReport()
    rep.add_entry("Linf", 1e-3, "grid", "8193")
    rep.add_entry("L2", 2e-3, "quadrature", "16x64")
    assert rep.add_check("ok", 1.0005, 1.0)
    assert not rep.add_check("bad", 1.01, 1.0)
    path = tmp_path / "r.json"
    rep.dump_json(path)
    data = json.loads(path.read_text())
    assert data["norms"]["Linf"]["lower_estimate"] is True
    assert data["norms"]["L2"]["lower_estimate"] is False
    assert [c["satisfied"] for c in data["bound_checks"]] == [True, False]
    assert data["all_satisfied"] is False
    with pytest.raises(DataError):
        rep.add_entry("L1", float("nan"), "quadrature", "")

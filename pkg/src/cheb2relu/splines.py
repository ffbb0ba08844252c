"""Continuous piecewise polynomials and their ReLU emulation.

A spline is stored through its values at the Clenshaw–Curtis points of
every element.  Adjacent elements share the sample at their common node, so
continuity holds bitwise for splines obtained by sampling.

The emulator is the sum of an exact network for the nodal piecewise-linear
interpolant ``vbar`` and one clamped polynomial emulator per element for
``v - vbar``, which vanishes at both element endpoints and hence outside the
element.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .calculus import affine_net, concat, identity_net, parallel_many, sparse_concat
from .chebyshev import ChebSeries, cc_coefficients, cc_grid, read_column_csv
from .emulator import (
    basis_columns,
    build_interval_emulator,
    interval_emulator_bounds,
    interval_tau,
)
from .errors import DataError, ParameterError, StructuralError
from .nn_core import Layer, NeuralNetwork, SizeMetrics

CONTINUITY_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class Mesh:
    """Nodes ``x_0 < ... < x_N`` with one polynomial degree per element."""

    nodes: np.ndarray
    degrees: np.ndarray

    def __post_init__(self):
        x = np.array(self.nodes, dtype=np.float64).reshape(-1)
        p = np.array(self.degrees).reshape(-1)
        if x.size < 2:
            raise StructuralError("a mesh needs at least two nodes")
        if not np.all(np.isfinite(x)):
            raise ParameterError("mesh nodes must be finite")
        if not np.all(np.diff(x) > 0):
            raise ParameterError("mesh nodes must be strictly increasing")
        if p.size != x.size - 1:
            raise StructuralError(f"{x.size - 1} elements but {p.size} degrees")
        if not np.all(p == np.round(p)) or np.any(p < 1):
            raise ParameterError("element degrees must be integers >= 1")
        p = p.astype(np.int64)
        x.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "nodes", x)
        object.__setattr__(self, "degrees", p)

    @classmethod
    def uniform(cls, a: float, b: float, n_elements: int, degree: int) -> "Mesh":
        return cls(np.linspace(a, b, n_elements + 1), np.full(n_elements, degree))

    @property
    def n_elements(self) -> int:
        return self.degrees.size

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def h(self) -> float:
        return float(self.widths.max())

    @property
    def dof(self) -> int:
        """Dimension of the continuous spline space: ``1 + sum p_i``."""
        return int(1 + self.degrees.sum())

    def element(self, i: int) -> tuple[float, float]:
        return float(self.nodes[i]), float(self.nodes[i + 1])

    def locate(self, x) -> np.ndarray:
        """Element index of each point (points outside are clamped to the end elements)."""
        idx = np.searchsorted(self.nodes, np.asarray(x, dtype=np.float64), side="right") - 1
        return np.clip(idx, 0, self.n_elements - 1)

    def cc_points(self, i: int) -> np.ndarray:
        return cc_grid(int(self.degrees[i]), self.element(i)).points


@dataclass(frozen=True, eq=False)
class PiecewiseCheb:
    """Continuous spline given by its Clenshaw–Curtis samples on every element.

    ``values[i][j]`` is the value at ``cc_grid(p_i, I_i).points[j]``; index 0
    is the right endpoint ``x_i`` and index ``p_i`` the left endpoint.
    """

    mesh: Mesh
    values: tuple[np.ndarray, ...]

    def __post_init__(self):
        vals = tuple(np.array(v, dtype=np.float64).reshape(-1) for v in self.values)
        if len(vals) != self.mesh.n_elements:
            raise StructuralError(f"{self.mesh.n_elements} elements but {len(vals)} value blocks")
        for i, (v, p) in enumerate(zip(vals, self.mesh.degrees)):
            if v.size != p + 1:
                raise StructuralError(f"element {i}: expected {p + 1} samples, got {v.size}")
            if not np.all(np.isfinite(v)):
                raise DataError(f"element {i}: non-finite sample")
            v.setflags(write=False)
        for i in range(len(vals) - 1):
            left, right = vals[i][0], vals[i + 1][-1]
            scale = max(abs(left), abs(right), 1.0)
            if abs(left - right) > CONTINUITY_RTOL * scale:
                raise DataError(
                    f"spline is discontinuous at node {i + 1} (x = {self.mesh.nodes[i + 1]!r}): "
                    f"{left!r} vs {right!r}"
                )
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_series(cls, mesh: Mesh, series) -> "PiecewiseCheb":
        series = list(series)
        if len(series) != mesh.n_elements:
            raise StructuralError(f"{mesh.n_elements} elements but {len(series)} series")
        vals = []
        for i, s in enumerate(series):
            if s.p > mesh.degrees[i]:
                raise StructuralError(f"element {i}: series degree {s.p} exceeds {mesh.degrees[i]}")
            vals.append(s.on(mesh.element(i))(mesh.cc_points(i)))
        return cls(mesh, tuple(vals))

    @cached_property
    def series(self) -> tuple[ChebSeries, ...]:
        return tuple(
            ChebSeries(cc_coefficients(v), self.mesh.element(i)) for i, v in enumerate(self.values)
        )

    @cached_property
    def nodal_values(self) -> np.ndarray:
        return np.array([self.values[0][-1]] + [v[0] for v in self.values])

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        idx = self.mesh.locate(x)
        out = np.empty_like(x)
        for i, s in enumerate(self.series):
            sel = idx == i
            out[sel] = s(x[sel])
        return out

    def derivative(self, x) -> np.ndarray:
        """Elementwise derivative; at nodes the right element is used."""
        x = np.asarray(x, dtype=np.float64)
        idx = self.mesh.locate(x)
        out = np.empty_like(x)
        for i, s in enumerate(self.series):
            sel = idx == i
            out[sel] = s.derivative()(x[sel])
        return out


def sample_to_spline(f, mesh: Mesh) -> PiecewiseCheb:
    """Elementwise Clenshaw–Curtis interpolant of ``f``.

    ``f`` is evaluated once per distinct point; the values at shared nodes
    are reused by both neighbouring elements.
    """
    nodal = np.asarray(f(mesh.nodes), dtype=np.float64)
    if not np.all(np.isfinite(nodal)):
        bad = mesh.nodes[~np.isfinite(nodal)][0]
        raise DataError(f"non-finite sample at x = {bad!r}")
    vals = []
    for i in range(mesh.n_elements):
        pts = mesh.cc_points(i)
        v = np.empty(pts.size)
        if pts.size > 2:
            inner = np.asarray(f(pts[1:-1]), dtype=np.float64)
            if not np.all(np.isfinite(inner)):
                bad = pts[1:-1][~np.isfinite(inner)][0]
                raise DataError(f"non-finite sample at x = {bad!r}")
            v[1:-1] = inner
        v[0], v[-1] = nodal[i + 1], nodal[i]
        vals.append(v)
    return PiecewiseCheb(mesh, tuple(vals))


def linear_part(values, a: float, b: float, points) -> np.ndarray:
    """Values at ``points`` of the line through ``(a, values[-1])`` and ``(b, values[0])``."""
    va, vb = values[-1], values[0]
    return (b - points) / (b - a) * va + (points - a) / (b - a) * vb


def output_weights_via_ifft(values, mesh: Mesh) -> list[np.ndarray]:
    """Chebyshev coefficients of ``v - vbar`` on every element.

    ``values`` holds the Clenshaw–Curtis samples of ``v`` per element.
    """
    values = list(values)
    if len(values) != mesh.n_elements:
        raise StructuralError(f"{mesh.n_elements} elements but {len(values)} value blocks")
    out = []
    for i, v in enumerate(values):
        v = np.asarray(v, dtype=np.float64)
        if v.size != mesh.degrees[i] + 1:
            raise StructuralError(f"element {i}: expected {mesh.degrees[i] + 1} samples, got {v.size}")
        a, b = mesh.element(i)
        w = v - linear_part(v, a, b, mesh.cc_points(i))
        w[0] = w[-1] = 0.0
        out.append(cc_coefficients(w))
    return out


def cpwl_interpolant_net(v: PiecewiseCheb) -> NeuralNetwork:
    """Depth-2 network equal to the nodal piecewise-linear interpolant on ``[x_0, x_N]``."""
    x = v.mesh.nodes
    y = v.nodal_values
    slopes = np.diff(y) / np.diff(x)
    n = slopes.size
    hidden = Layer(sp.csr_matrix(np.ones((n, 1))), -x[:-1])
    out = Layer(sp.csr_matrix(np.diff(slopes, prepend=0.0)[None, :]), [y[0]])
    return NeuralNetwork((hidden, out))


@dataclass(frozen=True, eq=False)
class SplineEmulator:
    """Assembled emulator together with the sub-networks it was built from."""

    net: NeuralNetwork
    vbar_net: NeuralNetwork
    element_nets: dict[int, NeuralNetwork]
    padding: dict[int, int]
    coefficient_columns: dict[int, np.ndarray] = field(default_factory=dict)
    eps: float = 0.0


def assemble_spline_emulator(v: PiecewiseCheb, eps: float) -> SplineEmulator:
    """Build the emulator and keep the pieces needed for size checks and read-back."""
    eps = float(eps)
    if not (0.0 < eps < 1.0):
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    mesh = v.mesh
    vbar = cpwl_interpolant_net(v)
    weights = output_weights_via_ifft(v.values, mesh)
    element_nets = {
        i: build_interval_emulator([ChebSeries(w, mesh.element(i))], eps / 4.0)
        for i, w in enumerate(weights)
        if mesh.degrees[i] >= 2
    }
    depths = [vbar.depth] + [net.depth for net in element_nets.values()]
    target = max(depths) + 1
    padding = {-1: target - vbar.depth}
    padding.update({i: target - net.depth for i, net in element_nets.items()})

    branches = [sparse_concat(vbar, identity_net(1, padding[-1]))]
    branches += [sparse_concat(net, identity_net(1, padding[i])) for i, net in element_nets.items()]
    body = parallel_many(branches)
    net = concat(affine_net(np.ones((1, len(branches))), [0.0]), body)

    columns, offset = {}, vbar.layers[-1].cols
    for i, sub in element_nets.items():
        columns[i] = offset + _positive_columns(sub, int(mesh.degrees[i]), eps / 4.0)
        offset += sub.layers[-1].cols
    return SplineEmulator(net, vbar, element_nets, padding, columns, eps)


def _positive_columns(element_net: NeuralNetwork, p: int, eps: float) -> np.ndarray:
    """Columns of the element output layer carrying the coefficients of ``T_1..T_p``."""
    cols = basis_columns(p, interval_tau(eps, p))
    return np.asarray(cols[1 : p + 1], dtype=np.int64)


def build_spline_emulator(v: PiecewiseCheb, eps: float) -> NeuralNetwork:
    """ReLU network emulating ``v`` with ``|v - R|_{W^{1,r}} <= eps/2 |v|_{W^{1,r}}``.

    Exact at all mesh nodes; hidden layers depend only on the mesh, the
    degrees and ``eps``.
    """
    return assemble_spline_emulator(v, eps).net


@dataclass(frozen=True)
class SplineSizeCheck:
    name: str
    measured: int
    bound: float

    @property
    def ok(self) -> bool:
        return self.measured <= self.bound


def spline_size_checks(em: SplineEmulator, mesh: Mesh) -> list[SplineSizeCheck]:
    """Size and depth inequalities of the assembly, instantiated with measured parts."""
    m: SizeMetrics = em.net.metrics
    N = mesh.n_elements
    p_sum = int(mesh.degrees.sum())
    vb = em.vbar_net.metrics
    size = vb.size + vb.size_first + 2 + 2 * em.padding[-1]
    depth = vb.depth
    for i, sub in em.element_nets.items():
        sm = sub.metrics
        size += sm.size + sm.size_first + 2 + 2 * em.padding[i]
        depth = max(depth, sm.depth)
    checks = [
        SplineSizeCheck("size_first", m.size_first, 2 * N + 2),
        SplineSizeCheck("size_last", m.size_last, 3 * N + 1 + 2 * p_sum),
        SplineSizeCheck("size", m.size, size),
        SplineSizeCheck("depth", m.depth, depth + 1),
        SplineSizeCheck("vbar_size", vb.size, 3 * N + 1),
        SplineSizeCheck("vbar_size_first", vb.size_first, 2 * N),
        SplineSizeCheck("vbar_size_last", vb.size_last, N + 1),
    ]
    for i, sub in em.element_nets.items():
        p = int(mesh.degrees[i])
        bounds = interval_emulator_bounds(p, em.eps / 4.0, p + 1)
        sm = sub.metrics
        checks += [
            SplineSizeCheck(f"element{i}_depth", sm.depth, bounds.depth),
            SplineSizeCheck(f"element{i}_size", sm.size, bounds.size),
            SplineSizeCheck(f"element{i}_size_first", sm.size_first, 4),
            SplineSizeCheck(f"element{i}_size_last", sm.size_last, 2 * (p + 1)),
        ]
    return checks


def read_spline_from_output_layer(net: NeuralNetwork, mesh: Mesh, eps: float) -> PiecewiseCheb:
    """Recover the emulated spline from the output layer of its emulator.

    The hidden layers of ``net`` must coincide with those of the emulator
    for ``(mesh, eps)``; the Chebyshev coefficients are then read off the
    output weights without any sampling.
    """
    template = assemble_spline_emulator(PiecewiseCheb.from_series(mesh, [
        ChebSeries([0.0], mesh.element(i)) for i in range(mesh.n_elements)
    ]), eps)
    hidden = template.net.layers[:-1]
    if net.depth != template.net.depth or not all(
        a.same_as(b) for a, b in zip(hidden, net.layers[:-1])
    ):
        raise StructuralError("network hidden layers do not match the emulator for this mesh")
    last = net.layers[-1]
    if last.rows != 1:
        raise StructuralError("expected a scalar-output network")
    row = last.weights.toarray()[0]
    bias = float(last.bias[0])

    N = mesh.n_elements
    slopes = np.cumsum(row[:N])
    w_coeffs = {}
    for i, cols in template.coefficient_columns.items():
        w = np.zeros(int(mesh.degrees[i]) + 1)
        w[1:] = row[cols]
        # w vanishes at both endpoints: sum w_l = 0 = sum (-1)^l w_l
        w[0] = -w[2::2].sum()
        w_coeffs[i] = w
    v0 = bias - sum(w[0] for w in w_coeffs.values())
    nodal = v0 + np.concatenate([[0.0], np.cumsum(slopes * mesh.widths)])

    series = []
    for i in range(N):
        c = w_coeffs.get(i, np.zeros(2)).copy()
        c[0] += 0.5 * (nodal[i] + nodal[i + 1])
        c[1] += 0.5 * (nodal[i + 1] - nodal[i])
        series.append(ChebSeries(c, mesh.element(i)))
    return PiecewiseCheb.from_series(mesh, series)


def network_to_spline(net: NeuralNetwork, mesh: Mesh) -> PiecewiseCheb:
    """Interpolate a scalar network at the elementwise Clenshaw–Curtis points."""
    from .nn_core import realize

    return sample_to_spline(lambda x: realize(net, np.asarray(x).reshape(-1))[:, 0], mesh)


def fractional_bound_report(v: PiecewiseCheb, net: NeuralNetwork, s: float, r, eps: float | None = None):
    """Interpolation-inequality certificate for the ``W^{s,r}`` error, ``0 < s < 1``.

    Reports ``e_{L^r}^(1-s) * e_{W^{1,r}}^s`` from measured integer-order
    errors.  With ``eps`` given, the certificate is also checked against
    ``h^(1-s) eps |v|_{W^{1,r}}``.
    """
    from .sobolev import ErrorReport, diff_norms, function_norms, norm_tags

    s = float(s)
    if not (0.0 < s < 1.0):
        raise ParameterError(f"s must lie in (0, 1), got {s}")
    lp_tag, semi_tag = norm_tags(r)
    errs = diff_norms(v, v.derivative, net, v.mesh, {lp_tag, semi_tag})
    e_lp = errs.value(lp_tag)
    e_semi = errs.value(semi_tag)
    e_w1 = max(e_lp, e_semi) if math.isinf(float(r)) else (e_lp ** r + e_semi ** r) ** (1.0 / r)
    cert = e_lp ** (1.0 - s) * e_w1 ** s
    report = ErrorReport(entries=dict(errs.entries))
    report.add_entry(f"W{s:g}_{r}_certificate", cert, "interpolation", f"s={s}")
    if eps is not None:
        v_semi = function_norms(v, v.derivative, v.mesh, {semi_tag}).value(semi_tag)
        report.add_check("fractional_certificate", cert, v.mesh.h ** (1.0 - s) * eps * v_semi)
    return report


# --- file formats -------------------------------------------------------

def write_mesh_csv(mesh: Mesh, nodes_path, degrees_path) -> None:
    with open(nodes_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node"])
        w.writerows([[repr(float(x))] for x in mesh.nodes])
    with open(degrees_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["degree"])
        w.writerows([[int(p)] for p in mesh.degrees])


def read_mesh_csv(nodes_path, degrees_path) -> Mesh:
    nodes = read_column_csv(nodes_path, "node")
    degrees = read_column_csv(degrees_path, "degree")
    return Mesh(nodes, degrees)


def write_values_csv(v: PiecewiseCheb, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["element_index", "cc_point", "value"])
        for i, vals in enumerate(v.values):
            for x, y in zip(v.mesh.cc_points(i), vals):
                w.writerow([i, repr(float(x)), repr(float(y))])


def read_values_csv(path, mesh: Mesh) -> PiecewiseCheb:
    blocks: dict[int, list[tuple[float, float]]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        needed = {"element_index", "cc_point", "value"}
        if reader.fieldnames is None or not needed <= set(reader.fieldnames):
            raise DataError(f"{path}: expected columns element_index,cc_point,value")
        try:
            for row in reader:
                blocks.setdefault(int(row["element_index"]), []).append(
                    (float(row["cc_point"]), float(row["value"]))
                )
        except ValueError as exc:
            raise DataError(f"{path}: {exc}") from exc
    if sorted(blocks) != list(range(mesh.n_elements)):
        raise DataError(f"{path}: expected element indices 0..{mesh.n_elements - 1}")
    vals = []
    for i in range(mesh.n_elements):
        pts = mesh.cc_points(i)
        rows = blocks[i]
        if len(rows) != pts.size:
            raise StructuralError(
                f"{path}: element {i} needs {pts.size} samples (degree {mesh.degrees[i]}), got {len(rows)}"
            )
        x = np.array([r[0] for r in rows])
        if not np.allclose(x, pts, rtol=1e-12, atol=1e-12 * mesh.h):
            raise DataError(f"{path}: element {i} sample points are not the Clenshaw–Curtis points")
        vals.append(np.array([r[1] for r in rows]))
    return PiecewiseCheb(mesh, tuple(vals))

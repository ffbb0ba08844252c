"""Convergence studies: p-version on uniform meshes, hp on geometric meshes, free knots."""

from __future__ import annotations

import csv
import math
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats

from .errors import ParameterError
from .nn_core import NeuralNetwork
from .sobolev import ErrorReport, diff_norms, singular_diff_norms
from .splines import Mesh, PiecewiseCheb, assemble_spline_emulator, sample_to_spline

CSV_FIELDS = ("dof", "nn_size", "nn_depth", "error_L2", "error_H1", "error_Linf", "wall_time_s")
#: per-element grid resolution for sup-norms in studies
STUDY_GRID = 1025

Measure = Callable[[NeuralNetwork, Mesh], ErrorReport]


@dataclass(frozen=True)
class GeometricMeshSpec:
    sigma: float
    N: int
    mu: float = 1.0
    delta_gevrey: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.sigma < 1.0:
            raise ParameterError(f"sigma must lie in (0, 1), got {self.sigma}")
        if int(self.N) != self.N or self.N < 1:
            raise ParameterError(f"N must be a positive integer, got {self.N}")
        if self.mu < 1.0:
            raise ParameterError(f"mu must be >= 1, got {self.mu}")
        if self.delta_gevrey < 1.0:
            raise ParameterError(f"delta_gevrey must be >= 1, got {self.delta_gevrey}")

    @property
    def lam(self) -> float:
        return 1.0 / self.sigma - 1.0


def geometric_mesh(spec: GeometricMeshSpec) -> Mesh:
    """Nodes ``0, sigma^(N-1), ..., sigma, 1``; degrees ``1, floor(mu i^delta)``."""
    N = int(spec.N)
    nodes = [0.0] + [spec.sigma ** (N - i) for i in range(1, N + 1)]
    degrees = [1] + [math.floor(spec.mu * i ** spec.delta_gevrey) for i in range(2, N + 1)]
    return Mesh(nodes, degrees)


def mu0(sigma: float, beta: float, delta: float, d_u: float) -> float:
    """Smallest admissible degree slope for the hp degree vector."""
    lam = 1.0 / sigma - 1.0
    return max(1.0, d_u * lam * math.exp(1.0 - delta) / (2.0 * sigma ** (1.0 - beta)))


@dataclass(frozen=True)
class StudyRecord:
    N: int
    dof: int
    nn_size: int
    nn_depth: int
    error_L2: float
    error_H1: float
    error_Linf: float
    wall_time: float
    eps: float = 0.0
    size_first: int = 0
    size_last: int = 0

    def row(self) -> list:
        return [self.N, self.dof, self.nn_size, self.nn_depth,
                repr(self.error_L2), repr(self.error_H1), repr(self.error_Linf),
                f"{self.wall_time:.3f}"]

    def same_result(self, other: "StudyRecord") -> bool:
        """Equality of everything except the wall time."""
        fields = ("N", "dof", "nn_size", "nn_depth", "error_L2", "error_H1", "error_Linf", "eps")
        return all(getattr(self, f) == getattr(other, f) for f in fields)


def workers() -> int:
    env = os.environ.get("CHEB2RELU_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise ParameterError(f"CHEB2RELU_THREADS must be an integer, got {env!r}") from exc
        return max(1, n)
    return os.cpu_count() or 1


def _pool_map(fn, items):
    items = list(items)
    n = min(workers(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _record(index: int, v: PiecewiseCheb, eps: float, measure: Measure) -> StudyRecord:
    start = time.perf_counter()
    net = assemble_spline_emulator(v, eps).net
    report = measure(net, v.mesh)
    elapsed = time.perf_counter() - start
    l2, semi = report.value("L2"), report.value("H1_semi")
    m = net.metrics
    return StudyRecord(
        N=index, dof=v.mesh.dof, nn_size=m.size, nn_depth=m.depth,
        error_L2=l2, error_H1=math.hypot(l2, semi), error_Linf=report.value("Linf"),
        wall_time=elapsed, eps=eps, size_first=m.size_first, size_last=m.size_last,
    )


def _smooth_measure(f, df, grid: int) -> Measure:
    return lambda net, mesh: diff_norms(f, df, net, mesh, {"L2", "H1_semi", "Linf"}, grid=grid)


def hp_target_measure(alpha: float, grid: int = STUDY_GRID) -> Measure:
    """Error measurement against ``x^alpha - x`` with graded quadrature at 0."""
    smooth = (lambda x: -x, lambda x: -np.ones_like(x))
    return lambda net, mesh: singular_diff_norms(
        alpha, net, mesh, {"L2", "H1_semi", "Linf"}, smooth=smooth, grid=grid
    )


def hp_target(alpha: float):
    """``(u, u')`` for ``u(x) = x^alpha - x``."""
    def u(x):
        x = np.asarray(x, dtype=np.float64)
        return np.power(x, alpha) - x

    def du(x):
        x = np.asarray(x, dtype=np.float64)
        with np.errstate(divide="ignore"):
            return alpha * np.power(x, alpha - 1.0) - 1.0

    return u, du


# --- studies --------------------------------------------------------------

def run_p_version_study(f, df, smoothness: float, n_elements: int, p_list, eps_rule=None, *,
                        interval=(0.0, 1.0), grid: int = STUDY_GRID) -> list[StudyRecord]:
    """Uniform mesh, degree sweep; records are keyed by ``p``.

    The default tolerance is ``(N p)^-(smoothness + 1)``, one order below the
    expected approximation error.
    """
    if eps_rule is None:
        eps_rule = lambda N, p: min(1e-2, float(N * p) ** -(smoothness + 1.0))
    a, b = interval
    measure = _smooth_measure(f, df, grid)

    def point(p):
        mesh = Mesh.uniform(a, b, n_elements, p)
        return _record(p, sample_to_spline(f, mesh), eps_rule(n_elements, p), measure)

    return sorted(_pool_map(point, sorted(set(int(p) for p in p_list))), key=lambda r: r.N)


def hp_rate(alpha: float, sigma: float) -> float:
    """Exponential rate ``c = (1 - beta) log(1/sigma)`` with ``beta = 1 - alpha``."""
    return alpha * math.log(1.0 / sigma)


def run_hp_study(alpha: float, specs, eps_rule=None, *, c: float | None = None,
                 beta: float | None = None, d_u: float | None = None,
                 grid: int = STUDY_GRID) -> list[StudyRecord]:
    """hp interpolation of ``x^alpha - x`` on geometric meshes, emulated at ``eps = exp(-c N)``."""
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    specs = sorted(specs, key=lambda s: s.N)
    beta = 1.0 - alpha if beta is None else beta
    if d_u is not None:
        for spec in specs:
            bound = mu0(spec.sigma, beta, spec.delta_gevrey, d_u)
            if spec.mu <= bound:
                warnings.warn(f"mu = {spec.mu} does not exceed mu0 = {bound:.4g}", RuntimeWarning,
                              stacklevel=2)
                break
    if eps_rule is None:
        def eps_rule(spec):
            rate = hp_rate(alpha, spec.sigma) if c is None else c
            return min(0.5, math.exp(-rate * spec.N))
    u, _ = hp_target(alpha)
    measure = hp_target_measure(alpha, grid)

    def point(spec):
        mesh = geometric_mesh(spec)
        return _record(spec.N, sample_to_spline(u, mesh), eps_rule(spec), measure)

    return sorted(_pool_map(point, specs), key=lambda r: r.N)


def run_free_knot_study(v: PiecewiseCheb, eps_list, measure: Measure | None = None,
                        *, grid: int = STUDY_GRID) -> list[StudyRecord]:
    """Emulate a supplied spline at several tolerances.

    Errors are measured against ``measure`` (for instance :func:`hp_target_measure`)
    or, by default, against the spline itself.
    """
    if measure is None:
        measure = _smooth_measure(v, v.derivative, grid)
    N = v.mesh.n_elements
    p = int(v.mesh.degrees.max())
    records = _pool_map(lambda e: _record(N, v, float(e), measure), eps_list)
    for r in records:
        if r.size_first > 2 * N + 2 or r.size_last > N * (2 * p + 3) + 1:
            raise AssertionError(f"size formula violated at eps={r.eps}: "
                                 f"M_fi={r.size_first}, M_la={r.size_last}")
    return sorted(records, key=lambda r: -r.eps)


# --- output and fits -----------------------------------------------------

def write_study_csv(records, path, key: str = "N") -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([key, *CSV_FIELDS])
        w.writerows(r.row() for r in records)


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    r2: float


def fit_line(x, y) -> LineFit:
    res = stats.linregress(np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64))
    return LineFit(float(res.slope), float(res.intercept), float(res.rvalue ** 2))


def exponential_fit(records) -> LineFit:
    """Fit ``log(error_H1) = a + slope * N``."""
    return fit_line([r.N for r in records], np.log([r.error_H1 for r in records]))


def size_fit(records, exponent: float = 1.0 / 3.0) -> LineFit:
    """Fit ``log(error_H1) = a + slope * M^exponent``."""
    return fit_line([r.nn_size ** exponent for r in records], np.log([r.error_H1 for r in records]))


def algebraic_rate(records, last: int | None = None) -> float:
    """Negative slope of ``log(error_H1)`` against ``log(p)``."""
    recs = list(records)[-last:] if last else list(records)
    return -fit_line(np.log([r.N for r in recs]), np.log([r.error_H1 for r in recs])).slope

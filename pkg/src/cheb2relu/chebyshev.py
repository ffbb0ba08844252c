"""Chebyshev series, Clenshaw–Curtis grids and interpolation.

Coefficient extraction from Clenshaw–Curtis samples uses a length-2p inverse
FFT of the even extension of the samples (a type-I discrete cosine
transform).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.polynomial import chebyshev as npcheb

from .errors import DataError, ParameterError, StructuralError

REFERENCE = (-1.0, 1.0)


def _check_interval(interval) -> tuple[float, float]:
    a, b = (float(t) for t in interval)
    if not (np.isfinite(a) and np.isfinite(b) and a < b):
        raise ParameterError(f"interval must satisfy a < b, got ({a}, {b})")
    return a, b


@dataclass(frozen=True, eq=False)
class ChebSeries:
    """``sum_k coeffs[k] T_k(F^{-1}(x))`` with ``F`` the affine map from [-1, 1] onto ``interval``."""

    coeffs: np.ndarray
    interval: tuple[float, float] = REFERENCE

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.float64).reshape(-1)
        if c.size == 0:
            raise StructuralError("a Chebyshev series needs at least one coefficient")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "interval", _check_interval(self.interval))

    @property
    def p(self) -> int:
        """Declared degree (number of coefficients minus one)."""
        return self.coeffs.size - 1

    @property
    def length(self) -> float:
        return self.interval[1] - self.interval[0]

    def to_reference(self, x):
        a, b = self.interval
        return (2.0 * np.asarray(x, dtype=np.float64) - (a + b)) / (b - a)

    def from_reference(self, t):
        a, b = self.interval
        return 0.5 * (a + b) + 0.5 * (b - a) * np.asarray(t, dtype=np.float64)

    def __call__(self, x):
        return cheb_eval(self, x)

    def derivative(self) -> "ChebSeries":
        if self.p == 0:
            return ChebSeries([0.0], self.interval)
        return ChebSeries(npcheb.chebder(self.coeffs) * (2.0 / self.length), self.interval)

    def on(self, interval) -> "ChebSeries":
        """Same coefficients, different interval."""
        return ChebSeries(self.coeffs, interval)

    def endpoint_values(self) -> tuple[float, float]:
        """Values at the left and right interval endpoints (exact sums)."""
        signs = (-1.0) ** np.arange(self.coeffs.size)
        return float(np.dot(signs, self.coeffs)), float(self.coeffs.sum())


def cheb_eval(series: ChebSeries, x):
    """Evaluate a Chebyshev series by the Clenshaw recurrence."""
    return npcheb.chebval(series.to_reference(x), series.coeffs)


def chebyshev_t(k: int, x):
    """``T_k(x)`` for the reference interval."""
    return npcheb.chebval(np.asarray(x, dtype=np.float64), np.eye(k + 1)[k])


@dataclass(frozen=True, eq=False)
class CCGrid:
    p: int
    interval: tuple[float, float]
    points: np.ndarray


def cc_reference_points(p: int) -> np.ndarray:
    """``cos(j pi / p)``, ``j = 0..p``, with exact symmetric values."""
    j = np.arange(p + 1)
    # sin form keeps the grid exactly antisymmetric and hits 0 exactly
    return np.sin(np.pi * (p - 2 * j) / (2 * p))


def cc_grid(p: int, interval=REFERENCE) -> CCGrid:
    """Mapped Clenshaw–Curtis points, decreasing from ``b`` to ``a``."""
    if int(p) != p or p < 1:
        raise ParameterError(f"Clenshaw–Curtis grid needs degree p >= 1, got {p}")
    p = int(p)
    a, b = _check_interval(interval)
    pts = 0.5 * (a + b) + 0.5 * (b - a) * cc_reference_points(p)
    pts[0], pts[-1] = b, a
    pts.setflags(write=False)
    return CCGrid(p, (a, b), pts)


def cc_coefficients(values) -> np.ndarray:
    """Chebyshev coefficients of the interpolant of samples at ``cos(j pi / p)``."""
    v = np.asarray(values, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise DataError("samples contain non-finite values")
    p = v.size - 1
    if p == 0:
        return v.copy()
    ext = np.concatenate([v, v[-2:0:-1]])
    c = np.fft.ifft(ext).real[: p + 1]
    c[1:p] *= 2.0
    return c


def cc_interpolate(values, grid: CCGrid) -> ChebSeries:
    """Interpolating Chebyshev series through ``values`` at the grid points."""
    v = np.asarray(values, dtype=np.float64).reshape(-1)
    if v.size != grid.p + 1:
        raise StructuralError(f"expected {grid.p + 1} samples for degree {grid.p}, got {v.size}")
    return ChebSeries(cc_coefficients(v), grid.interval)


def sample_cc(f, p: int, interval=REFERENCE) -> np.ndarray:
    grid = cc_grid(p, interval)
    vals = np.asarray(f(grid.points), dtype=np.float64)
    if not np.all(np.isfinite(vals)):
        bad = grid.points[~np.isfinite(vals)]
        raise DataError(f"non-finite sample at x = {bad[0]!r}")
    return vals


def interpolate(f, p: int, interval=REFERENCE) -> ChebSeries:
    """Degree-``p`` Clenshaw–Curtis interpolant of a callable."""
    return cc_interpolate(sample_cc(f, p, interval), cc_grid(p, interval))


def lebesgue_constant(p: int, npts: int = 10001) -> float:
    """Lebesgue constant of Clenshaw–Curtis interpolation, maximized on a uniform grid."""
    if int(p) != p or p < 1:
        raise ParameterError(f"degree must be >= 1, got {p}")
    nodes = cc_reference_points(int(p))
    w = (-1.0) ** np.arange(p + 1)
    w[0] *= 0.5
    w[-1] *= 0.5
    x = np.linspace(-1.0, 1.0, npts)
    diff = x[:, None] - nodes[None, :]
    on_node = np.any(diff == 0.0, axis=1)
    diff[diff == 0.0] = 1.0
    q = w / diff
    lam = np.abs(q).sum(axis=1) / np.abs(q.sum(axis=1))
    lam[on_node] = 1.0
    return float(lam.max())


def lebesgue_bound(p: int) -> float:
    return 2.0 / math.pi * math.log(p + 1) + 1.0


def coeff_tail_sum(series: ChebSeries) -> float:
    """``sum_{l >= 2} |v_l|``."""
    return float(np.abs(series.coeffs[2:]).sum())


def sup_norm_estimate(series: ChebSeries, npts: int = 4097) -> float:
    """Max of ``|series|`` over a Clenshaw–Curtis-distributed grid (a lower bound)."""
    t = cc_reference_points(npts - 1)
    return float(np.abs(npcheb.chebval(t, series.coeffs)).max())


# --- CSV ----------------------------------------------------------------

def write_coeffs_csv(series: ChebSeries, target) -> None:
    """Write ``cheb_coeffs,a,b`` rows to a path or an open text stream."""
    if hasattr(target, "write"):
        _write_coeff_rows(series, target)
    else:
        with open(target, "w", newline="") as fh:
            _write_coeff_rows(series, fh)


def _write_coeff_rows(series: ChebSeries, fh) -> None:
    a, b = series.interval
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["cheb_coeffs", "a", "b"])
    for c in series.coeffs:
        w.writerow([repr(float(c)), repr(a), repr(b)])


def read_coeffs_csv(path) -> ChebSeries:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [h.strip() for h in rows[0]] != ["cheb_coeffs", "a", "b"]:
        raise DataError(f"{path}: expected header 'cheb_coeffs,a,b'")
    body = [r for r in rows[1:] if r]
    if not body:
        raise DataError(f"{path}: no coefficients")
    try:
        coeffs = [float(r[0]) for r in body]
        a, b = float(body[0][1]), float(body[0][2])
    except (ValueError, IndexError) as exc:
        raise DataError(f"{path}: {exc}") from exc
    return ChebSeries(coeffs, (a, b))


def read_column_csv(path, column: str) -> np.ndarray:
    """Read one named numeric column of a CSV file."""
    with open(Path(path), newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or column not in reader.fieldnames:
            raise DataError(f"{path}: missing column '{column}'")
        try:
            return np.array([float(row[column]) for row in reader])
        except ValueError as exc:
            raise DataError(f"{path}: {exc}") from exc

"""Lebesgue and Sobolev (semi)norms of the difference between a function and a network.

Integrals use composite Gauss–Legendre quadrature with 16 nodes on each of
64 equal panels per mesh element.  Sup-norms are taken over a uniform grid
per element, with one-sided network derivatives from both sides, and are
therefore lower estimates.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DataError, ParameterError
from .nn_core import NeuralNetwork, realize_two_sided, realize_with_derivative

ALL_NORMS = frozenset({"L1", "L2", "Linf", "W1_1", "H1_semi", "W1_inf"})
QUAD_ORDER = 16
PANELS = 64
GRID = 8193
#: relative slack applied to the right-hand side of every bound check
SLACK = 1e-3

_GAUSS = np.polynomial.legendre.leggauss(QUAD_ORDER)


def norm_tags(r) -> tuple[str, str]:
    """(``L^r`` tag, ``W^{1,r}`` seminorm tag) for ``r`` in {1, 2, inf}."""
    r = float(r)
    table = {1.0: ("L1", "W1_1"), 2.0: ("L2", "H1_semi"), math.inf: ("Linf", "W1_inf")}
    if r not in table:
        raise ParameterError(f"norm index must be 1, 2 or inf, got {r}")
    return table[r]


@dataclass
class NormEntry:
    value: float
    method: str
    resolution: str


@dataclass
class BoundCheck:
    name: str
    lhs: float
    rhs: float
    satisfied: bool


@dataclass
class ErrorReport:
    entries: dict[str, NormEntry] = field(default_factory=dict)
    bound_checks: list[BoundCheck] = field(default_factory=list)
    metrics: dict[str, int] = field(default_factory=dict)

    def add_entry(self, tag: str, value: float, method: str, resolution: str) -> None:
        if not value >= 0.0:
            raise DataError(f"norm {tag} evaluated to {value!r}")
        self.entries[tag] = NormEntry(float(value), method, resolution)

    def value(self, tag: str) -> float:
        return self.entries[tag].value

    def add_check(self, name: str, lhs: float, rhs: float, slack: float = SLACK) -> bool:
        ok = bool(lhs <= rhs * (1.0 + slack))
        self.bound_checks.append(BoundCheck(name, float(lhs), float(rhs), ok))
        return ok

    @property
    def all_satisfied(self) -> bool:
        return all(c.satisfied for c in self.bound_checks)

    def to_dict(self) -> dict:
        out = {
            "norms": {
                tag: {**asdict(e), "lower_estimate": e.method == "grid"}
                for tag, e in sorted(self.entries.items())
            },
            "bound_checks": [asdict(c) for c in self.bound_checks],
            "all_satisfied": self.all_satisfied,
        }
        if self.metrics:
            out["metrics"] = dict(self.metrics)
        return out

    def dump_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)


# --- sample layouts --------------------------------------------------------

def _panel_nodes(a: float, b: float, panels: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss nodes and weights of the composite rule on ``[a, b]``."""
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = (mid[:, None] + half[:, None] * _GAUSS[0][None, :]).ravel()
    w = (half[:, None] * _GAUSS[1][None, :]).ravel()
    return x, w


def _graded_nodes(a: float, b: float, levels: int, q: float = 10.0) -> tuple[np.ndarray, np.ndarray]:
    """Composite rule on ``[a, b]`` graded geometrically toward ``a``.

    Levels ``[a + L 2^-(j+1), a + L 2^-j]`` get 2 panels each; the innermost
    interval ``[a, a + L 2^-levels]`` uses the substitution ``x = a + eta s^q``,
    which removes algebraic endpoint singularities of the integrand.
    """
    L = b - a
    xs, ws = [], []
    for j in range(levels):
        x, w = _panel_nodes(a + L * 2.0 ** -(j + 1), a + L * 2.0 ** -j, 2)
        xs.append(x)
        ws.append(w)
    eta = L * 2.0 ** -levels
    s, sw = _panel_nodes(0.0, 1.0, 1)
    xs.append(a + eta * s ** q)
    ws.append(sw * eta * q * s ** (q - 1.0))
    return np.concatenate(xs), np.concatenate(ws)


def _element_grid(a: float, b: float, npts: int) -> np.ndarray:
    return np.linspace(a, b, npts)


# --- core ------------------------------------------------------------------

def _finite(tag: str, x: np.ndarray, vals: np.ndarray) -> None:
    bad = ~np.isfinite(vals)
    if np.any(bad):
        raise DataError(f"non-finite {tag} at x = {x[bad][0]!r}")


def _network_eval(net: NeuralNetwork | None, x: np.ndarray, output: int, side: str = "right"):
    if net is None:
        return np.zeros_like(x), np.zeros_like(x)
    v, d = realize_with_derivative(net, x, side=side)
    return v[:, output], d[:, output]


def _measure(f, df, net, nodes, norms, *, output=0, panels=PANELS, grid=GRID,
             graded_first: int | None = None):
    norms = set(norms)
    unknown = norms - ALL_NORMS
    if unknown:
        raise ParameterError(f"unknown norm tags {sorted(unknown)}")
    nodes = np.asarray(getattr(nodes, "nodes", nodes), dtype=np.float64)
    n_el = nodes.size - 1
    report = ErrorReport()
    per_element = {tag: np.zeros(n_el) for tag in norms}

    quad_tags = norms & {"L1", "L2", "W1_1", "H1_semi"}
    if quad_tags:
        xs, ws, owner = [], [], []
        for i in range(n_el):
            a, b = nodes[i], nodes[i + 1]
            if graded_first is not None and i == 0:
                x, w = _graded_nodes(a, b, graded_first)
            else:
                x, w = _panel_nodes(a, b, panels)
            xs.append(x)
            ws.append(w)
            owner.append(np.full(x.size, i))
        x, w, owner = np.concatenate(xs), np.concatenate(ws), np.concatenate(owner)
        fv = np.asarray(f(x), dtype=np.float64)
        _finite("function value", x, fv)
        dv = np.asarray(df(x), dtype=np.float64)
        _finite("derivative", x, dv)
        nv, nd = _network_eval(net, x, output)
        _finite("network value", x, nv)
        e, de = fv - nv, dv - nd
        integrands = {"L1": np.abs(e), "L2": e * e, "W1_1": np.abs(de), "H1_semi": de * de}
        for tag in quad_tags:
            per_element[tag] = np.bincount(owner, weights=w * integrands[tag], minlength=n_el)
        res = (f"{QUAD_ORDER}-node Gauss-Legendre x {panels} panels per element"
               + (f"; {graded_first} graded levels on element 0" if graded_first is not None else ""))
        for tag in quad_tags:
            total = per_element[tag].sum()
            if tag in ("L2", "H1_semi"):
                total = math.sqrt(total)
                per_element[tag] = np.sqrt(per_element[tag])
            report.add_entry(tag, total, "quadrature", res)

    grid_tags = norms & {"Linf", "W1_inf"}
    if grid_tags:
        for i in range(n_el):
            a, b = nodes[i], nodes[i + 1]
            x = _element_grid(a, b, grid)
            if graded_first is not None and i == 0:
                x = np.concatenate([a + (b - a) * 2.0 ** -np.arange(graded_first, 0, -1), x])
                x = np.unique(x)
            fv = np.asarray(f(x), dtype=np.float64)
            if net is None:
                nv = nd_r = nd_l = np.zeros_like(x)
            else:
                nv, nd_r, nd_l = (c[:, output] for c in realize_two_sided(net, x))
            if "Linf" in grid_tags:
                _finite("function value", x, fv)
                per_element["Linf"][i] = np.abs(fv - nv).max()
            if "W1_inf" in grid_tags:
                # the target derivative at the right end is taken as a left limit,
                # so piecewise targets are evaluated on this element
                xd = x.copy()
                xd[-1] = np.nextafter(b, a)
                dv = np.asarray(df(xd), dtype=np.float64)
                _finite("derivative", xd, dv)
                right = np.abs(dv[:-1] - nd_r[:-1]).max()
                left = np.abs(dv[1:] - nd_l[1:]).max()
                per_element["W1_inf"][i] = max(left, right)
        res = f"{grid}-point uniform grid per element"
        for tag in grid_tags:
            report.add_entry(tag, per_element[tag].max(), "grid", res)
    return report, per_element


def diff_norms(f, df, net: NeuralNetwork, mesh, norms=ALL_NORMS, *, output: int = 0,
               panels: int = PANELS, grid: int = GRID) -> ErrorReport:
    """Norms of ``f - R(net)`` over the mesh elements.

    ``f`` and ``df`` are vectorized callables for the target and its
    derivative; ``mesh`` is a :class:`Mesh` or a node array.
    """
    report, per_element = _measure(f, df, net, mesh, norms, output=output, panels=panels, grid=grid)
    report.per_element = per_element
    return report


def element_diff_norms(f, df, net, mesh, norms=ALL_NORMS, **kw) -> dict[str, np.ndarray]:
    """Per-element values of :func:`diff_norms`."""
    _, per_element = _measure(f, df, net, mesh, norms, **kw)
    return per_element


def function_norms(f, df, mesh, norms=ALL_NORMS, **kw) -> ErrorReport:
    """Norms of ``f`` itself (network replaced by zero)."""
    report, per_element = _measure(f, df, None, mesh, norms, **kw)
    report.per_element = per_element
    return report


def singular_diff_norms(alpha: float, net: NeuralNetwork | None, mesh, norms=ALL_NORMS, *,
                        smooth=None, levels: int = 40, output: int = 0,
                        panels: int = PANELS, grid: int = GRID) -> ErrorReport:
    """Norms of ``x**alpha + smooth(x) - R(net)`` with a singularity at ``x = 0``.

    The first element is integrated on ``levels`` geometrically graded
    sub-intervals toward 0.  ``smooth`` is an optional pair ``(g, dg)`` of
    vectorized callables added to the power.
    """
    alpha = float(alpha)
    if alpha <= 0.0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    nodes = np.asarray(getattr(mesh, "nodes", mesh), dtype=np.float64)
    if nodes[0] != 0.0:
        raise ParameterError("the singular point x = 0 must be the first mesh node")
    norms = set(norms)
    if alpha <= 0.5 and "H1_semi" in norms:
        warnings.warn(
            f"|x^{alpha}|_H1 is infinite for alpha <= 1/2; reporting the quadrature value",
            RuntimeWarning,
            stacklevel=2,
        )
    g, dg = smooth if smooth is not None else (None, None)

    def f(x):
        x = np.asarray(x, dtype=np.float64)
        out = np.power(x, alpha)
        return out + g(x) if g is not None else out

    def df(x):
        x = np.asarray(x, dtype=np.float64)
        with np.errstate(divide="ignore"):
            out = alpha * np.power(x, alpha - 1.0)
        return out + dg(x) if dg is not None else out

    # derivative is unbounded at 0; the sup-norm of the derivative is taken on (0, x_1]
    report, per_element = _measure(f, df, net, nodes, norms - {"W1_inf"}, output=output,
                                   panels=panels, grid=grid, graded_first=levels)
    if "W1_inf" in norms:
        report.add_entry("W1_inf", math.inf if alpha < 1.0 else 0.0, "analytic", "unbounded at 0")
    report.per_element = per_element
    return report

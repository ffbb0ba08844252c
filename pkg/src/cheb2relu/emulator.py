"""ReLU emulation of Chebyshev polynomials and Chebyshev expansions.

``build_cheb_tower(k, delta)`` realizes ``(x, T~_{2^(k-1)}, ..., T~_{2^k})``
through the three-term product recursion ``T_{a+b} = 2 T_a T_b - T_{a-b}``
with approximate multiplication networks.  ``build_poly_emulator`` combines
towers of all levels up to ``ceil(log2 n)`` and puts the Chebyshev
coefficients into a single output layer, so that every hidden layer depends
only on ``n`` and the tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .calculus import (
    affine_net,
    full_parallel_many,
    identity_net,
    parallel_many,
    sparse_concat,
)
from .chebyshev import ChebSeries
from .errors import ParameterError, StructuralError
from .nn_core import Layer, NeuralNetwork
from .product import product_constants, product_net

#: constant bounding ((r'+1) n^2)^(1/r') / n^2 over r' >= 1, n >= 1
C0 = 2.0


@dataclass(frozen=True)
class SizeBounds:
    depth: float
    size: float
    size_first: float
    size_last: float

    def check(self, metrics) -> dict[str, tuple[int, float, bool]]:
        """Compare measured metrics against the bounds: name -> (measured, bound, ok)."""
        pairs = {
            "depth": (metrics.depth, self.depth),
            "size": (metrics.size, self.size),
            "size_first": (metrics.size_first, self.size_first),
            "size_last": (metrics.size_last, self.size_last),
        }
        return {name: (got, bound, got <= bound) for name, (got, bound) in pairs.items()}


def _check_tolerance(name: str, value: float) -> float:
    value = float(value)
    if not (0.0 < value < 1.0):
        raise ParameterError(f"{name} must lie in (0, 1), got {value}")
    return value


def theta(k: int, delta: float) -> float:
    """Tolerance for the level-``k`` tower inside the level ``k + 1`` tower."""
    return 2.0 ** (-2 * k - 4) * delta


# --- tower ---------------------------------------------------------------

def _routing_net(k: int) -> NeuralNetwork:
    """Linear map duplicating tower outputs into product-input pairs."""
    n_in = 2 ** (k - 1) + 2
    n_out = 2 ** (k + 1) + 2
    rows = np.arange(n_out)
    cols = np.empty(n_out, dtype=np.int64)
    cols[0] = 0
    cols[1] = n_in - 1
    m = np.arange(3, n_out + 1)
    cols[2:] = -(-(m + 5) // 4) - 1
    w = sp.csr_matrix((np.ones(n_out), (rows, cols)), shape=(n_out, n_in))
    return affine_net(w, np.zeros(n_out))


def _recombination_net(k: int) -> NeuralNetwork:
    """``(x, T_{2^k}, P_1, ..., P_{2^k}) -> (x, T_{2^k}, 2 P_j - x or 2 P_j - 1)``."""
    n = 2 ** k + 2
    rows, cols, vals = [0, 1], [0, 1], [1.0, 1.0]
    bias = np.zeros(n)
    for m in range(3, n + 1):
        rows.append(m - 1)
        cols.append(m - 1)
        vals.append(2.0)
        if m % 2:
            rows.append(m - 1)
            cols.append(0)
            vals.append(-1.0)
        else:
            bias[m - 1] = -1.0
    return affine_net(sp.csr_matrix((vals, (rows, cols)), shape=(n, n)), bias)


@lru_cache(maxsize=128)
def build_cheb_tower(k: int, delta: float) -> NeuralNetwork:
    """Network with outputs ``(x, T~_l(x))`` for ``l = 2^(k-1), ..., 2^k``.

    Each ``T~_l`` is within ``delta`` of ``T_l`` in ``W^{1,inf}(-1, 1)`` and
    equals ``(±1)^l`` at ``x = ±1``.
    """
    if int(k) != k or k < 1:
        raise ParameterError(f"tower level must be a positive integer, got {k}")
    k = int(k)
    delta = _check_tolerance("delta", delta)
    if k == 1:
        prod = product_net(delta / 4.0, 1.0)
        layers = list(prod.layers)
        first, last = layers[0], layers[-1]
        layers[0] = Layer(first.weights @ sp.csr_matrix(np.ones((2, 1))), first.bias)
        layers[-1] = Layer(2.0 * last.weights, 2.0 * last.bias - 1.0)
        squarer = NeuralNetwork(tuple(layers))
        ident = identity_net(1, squarer.depth)
        return parallel_many([ident, ident, squarer])

    j = k - 1
    th = theta(j, delta)
    inner = build_cheb_tower(j, th)
    prod = product_net(th, 2.0)
    products = full_parallel_many([identity_net(2, prod.depth)] + [prod] * 2 ** j)
    outer = sparse_concat(_recombination_net(j), products)
    return sparse_concat(outer, sparse_concat(_routing_net(j), inner))


def tower_bounds(k: int, delta: float) -> SizeBounds:
    """Explicit depth and size bounds for ``build_cheb_tower(k, delta)``."""
    CL, CLp, CM, CMp, Cfi, Cla = product_constants()
    C1 = 9 * CM + CMp + Cfi + Cla + 14
    C2 = 20 * CL + 4 * CLp + Cla + 24
    lg = math.log2(1.0 / delta)
    depth = CL * (2.0 / 3.0 * k ** 3 + 3 * k ** 2 + k * lg) + (5 * CL + CLp + 2) * k
    size = (
        4 * CM * k * 2 ** k + CM * 2 ** k * lg + 4 * k * CL * lg
        + C1 * 2 ** k + 8.0 / 3.0 * CL * k ** 3 + 12 * CL * k ** 2 + C2 * k
    )
    return SizeBounds(depth, size, Cfi + 4, 2 ** (k + 1) + Cla + 4)


# --- polynomial emulator ---------------------------------------------------

def _levels(n: int) -> int:
    return max(1, math.ceil(math.log2(n)))


@lru_cache(maxsize=128)
def _basis_net(n: int, tau: float) -> tuple[NeuralNetwork, tuple[int, ...]]:
    """Parallel towers emitting ``T~_1, ..., T~_{2^k}``; also the output column of each ``T~_l``."""
    k = _levels(n)
    towers = [build_cheb_tower(j, tau) for j in range(1, k + 1)]
    target = towers[-1].depth + 1
    branches = [sparse_concat(t, identity_net(1, target - t.depth)) for t in towers]
    columns = [0, 1, 2]  # T_0 (unused), T_1, T_2 from the level-1 tower
    offset = 3
    for j in range(2, k + 1):
        base = 2 ** (j - 1)
        columns += [offset + 1 + (l - base) for l in range(base + 1, 2 ** j + 1)]
        offset += base + 2
    return parallel_many(branches), tuple(columns)


def basis_columns(n: int, tau: float) -> tuple[int, ...]:
    """Column of ``T~_l`` among the outputs of the shared basis network, ``l = 0..2^k``."""
    return _basis_net(n, tau)[1]


def _coefficient_matrix(polys: list[ChebSeries], n: int) -> np.ndarray:
    coef = np.zeros((len(polys), n + 1))
    for i, s in enumerate(polys):
        coef[i, : s.coeffs.size] = s.coeffs
    return coef


def _declared_degree(polys) -> int:
    if not polys:
        raise StructuralError("need at least one polynomial")
    return max(s.p for s in polys)


def build_poly_emulator(polys, tau: float) -> NeuralNetwork:
    """Emulate several Chebyshev series on ``[-1, 1]`` with one network.

    Output ``i`` is within ``tau * sum_{l >= 2} |v_{i,l}|`` of ``polys[i]`` in
    ``W^{1,inf}(-1, 1)`` and exact at ``±1``.  The hidden layers depend only
    on the largest declared degree ``n`` and on ``tau``.
    """
    polys = list(polys)
    n = _declared_degree(polys)
    tau = _check_tolerance("tau", tau)
    coef = _coefficient_matrix(polys, n)
    if n <= 1:
        a1 = coef[:, 1:2] if n == 1 else np.zeros((len(polys), 1))
        return affine_net(a1, coef[:, 0])
    basis, columns = _basis_net(n, tau)
    rows, cols, vals = [], [], []
    for i in range(len(polys)):
        for l in range(1, n + 1):
            if coef[i, l] != 0.0:
                rows.append(i)
                cols.append(columns[l])
                vals.append(coef[i, l])
    out = sp.csr_matrix((vals, (rows, cols)), shape=(len(polys), basis.output_dim))
    return sparse_concat(affine_net(out, coef[:, 0]), basis)


def nonzero_coefficient_count(polys) -> int:
    return int(sum(np.count_nonzero(s.coeffs) for s in polys))


def poly_emulator_bounds(n: int, tau: float, c_n: int) -> SizeBounds:
    """Depth and size bounds for :func:`build_poly_emulator`, fully expanded.

    ``c_n`` is the total number of nonzero coefficients.
    """
    if n <= 1:
        return SizeBounds(1, c_n, c_n, c_n)
    _, _, _, _, Cfi, Cla = product_constants()
    k = _levels(n)
    top = tower_bounds(k, tau)
    size = 2 * c_n + (Cfi + 4) * k + 2 * k + 2 * k * top.depth
    size += sum(2 ** (j + 1) + Cla + 4 + tower_bounds(j, tau).size for j in range(1, k + 1))
    return SizeBounds(top.depth + 2, size, 4 * k, 2 * c_n)


# --- clamped interval emulator --------------------------------------------

def clamp_net(a: float, b: float) -> NeuralNetwork:
    """Depth-2 network of ``x -> clip(2 (x - (a + b)/2) / (b - a), -1, 1)``."""
    if not a < b:
        raise ParameterError(f"interval must satisfy a < b, got ({a}, {b})")
    s = 2.0 / (b - a)
    return NeuralNetwork((
        Layer.dense([[1.0], [1.0]], [-a, -b]),
        Layer.dense([[s, -s]], [-1.0]),
    ))


def interval_tau(eps: float, n: int) -> float:
    """Reference-interval tolerance giving accuracy ``eps`` on a mapped interval."""
    return eps / (4.0 * C0 * max(n, 1) ** 6)


def build_interval_emulator(polys, eps: float) -> NeuralNetwork:
    """Emulate Chebyshev series on a common interval ``(a, b)``.

    Outputs are frozen at the endpoint values outside ``[a, b]``.
    """
    polys = list(polys)
    eps = _check_tolerance("eps", eps)
    n = _declared_degree(polys)
    intervals = {s.interval for s in polys}
    if len(intervals) != 1:
        raise StructuralError("all series must share one interval")
    (a, b), = intervals
    reference = [s.on((-1.0, 1.0)) for s in polys]
    return sparse_concat(build_poly_emulator(reference, interval_tau(eps, n)), clamp_net(a, b))


def interval_emulator_bounds(n: int, eps: float, c_n: int) -> SizeBounds:
    inner = poly_emulator_bounds(n, interval_tau(eps, n), c_n)
    # clamp: M = 7, M_fi = 4, M_la = 3
    return SizeBounds(inner.depth + 2, inner.size + inner.size_first + 3 + 7, 4, inner.size_last)

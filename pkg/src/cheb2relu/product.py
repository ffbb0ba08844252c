"""Approximate multiplication network.

The product is written as ``ab = q(a + b) - q(a - b)`` with ``q(y) = y**2/4``,
and ``q`` is replaced by its piecewise-linear interpolant on a uniform dyadic
grid.  The interpolant of ``t**2`` on ``[0, 1]`` with spacing ``2**-m`` is the
classical sawtooth sum ``t - sum_s g_s(t) / 4**s`` where ``g_s`` is the s-fold
composition of the hat function.

Because the interpolation error of ``y**2/4`` is the same even, h-periodic
bump in every grid cell and ``1`` is a grid node, the errors at ``1 + b`` and
``1 - b`` cancel and ``R(±1, b) = ±b`` holds exactly (up to rounding).  The
two channels ``y = a + b`` and ``y = a - b`` are evaluated by structurally
identical, interleaved units, which makes ``R(a, 0) = R(0, a) = 0`` exact in
floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .errors import ParameterError
from .nn_core import Layer, NeuralNetwork

# (C_L, C'_L, C_M, C'_M, C_fi, C_la); see product_constants
_CONSTANTS = (1, 4, 16, 50, 8, 6)


@dataclass(frozen=True)
class ProductSpec:
    delta: float
    kappa: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.delta < 0.5):
            raise ParameterError(f"delta must lie in (0, 1/2), got {self.delta}")
        if not (self.kappa > 0.0 and math.isfinite(self.kappa)):
            raise ParameterError(f"kappa must be positive and finite, got {self.kappa}")

    @property
    def kappa_eff(self) -> float:
        return max(self.kappa, 1.0)

    @property
    def scale(self) -> float:
        """Smallest power of two ``K >= 2 max(kappa, 1)``; ``|a ± b| <= K``."""
        return 2.0 ** math.ceil(math.log2(2.0 * self.kappa_eff))

    @property
    def m(self) -> int:
        """Number of sawtooth levels: the least ``m >= 1`` with ``K / 2**m < 2 delta``."""
        m = max(1, math.floor(math.log2(self.scale / (2.0 * self.delta))))
        while self.scale / 2.0 ** m >= 2.0 * self.delta:
            m += 1
        while m > 1 and self.scale / 2.0 ** (m - 1) < 2.0 * self.delta:
            m -= 1
        return m

    @property
    def spacing(self) -> float:
        """Grid spacing ``h`` of the interpolant of ``y**2/4``."""
        return self.scale / 2.0 ** self.m

    @property
    def value_error_bound(self) -> float:
        return self.spacing ** 2 / 8.0

    @property
    def derivative_error_bound(self) -> float:
        return self.spacing / 2.0


def product_constants() -> tuple[int, int, int, int, int, int]:
    """``(C_L, C'_L, C_M, C'_M, C_fi, C_la)`` for :func:`build_product`.

    With ``x = log2(max(kappa, 1) / delta)`` the network satisfies
    ``L <= C_L x + C'_L``, ``M <= C_M x + C'_M``, ``M_fi <= C_fi`` and
    ``M_la <= C_la``.  The level count obeys ``m <= x + 2`` while
    ``L = m + 2`` and ``M = 16 m + 18`` (30 when ``m = 1``).
    """
    return _CONSTANTS


def _channel_block(rows_per_channel: list[dict[int, float]], biases: list[float], n_in_kinds: int):
    """Assemble an interleaved two-channel layer.

    ``rows_per_channel[k]`` maps an input unit kind to a weight for output
    unit kind ``k``.  Unit ``(kind, channel)`` sits at index ``2 * kind + channel``.
    """
    n_out = len(rows_per_channel)
    rows, cols, vals = [], [], []
    bias = np.zeros(2 * n_out)
    for k, row in enumerate(rows_per_channel):
        for c in (0, 1):
            for kind, w in sorted(row.items()):
                rows.append(2 * k + c)
                cols.append(2 * kind + c)
                vals.append(w)
            bias[2 * k + c] = biases[k]
    w = sp.csr_matrix((vals, (rows, cols)), shape=(2 * n_out, 2 * n_in_kinds))
    return Layer(w, bias)


@lru_cache(maxsize=256)
def _build(delta: float, kappa: float) -> NeuralNetwork:
    spec = ProductSpec(delta, kappa)
    K, m = spec.scale, spec.m

    # layer 1: kinds 0 -> relu(±(a+b)) ... channel 0 is y = a + b, channel 1 is y = a - b
    first = Layer.dense(
        [[1.0, 1.0], [1.0, -1.0], [-1.0, -1.0], [-1.0, 1.0]],
        np.zeros(4),
    )
    layers = [first]

    # level 1 (kinds t, r1, r2) from (u+, u-) with t = (u+ + u-)/K
    inv = 1.0 / K
    layers.append(_channel_block(
        [{0: inv, 1: inv}, {0: inv, 1: inv}, {0: inv, 1: inv}],
        [0.0, -0.5, -1.0],
        n_in_kinds=2,
    ))
    # linear forms of S_s and g_s in terms of the current level's kinds
    S = {0: 0.5, 1: 1.0, 2: -0.5}
    g = {0: 2.0, 1: -4.0, 2: 2.0}
    for s in range(2, m + 1):
        layers.append(_channel_block([dict(S), dict(g), dict(g)], [0.0, 0.0, -0.5], n_in_kinds=3))
        # new kinds: A = relu(S), B = relu(g), C = relu(g - 1/2)
        g = {1: 2.0, 2: -4.0}
        S = {0: 1.0, 1: -2.0 / 4.0 ** s, 2: 4.0 / 4.0 ** s}

    # output: (K^2/4) * (S+ - S-), interleaved so that equal channels cancel exactly
    c = K * K / 4.0
    cols, vals = [], []
    for kind, w in sorted(S.items()):
        cols += [2 * kind, 2 * kind + 1]
        vals += [c * w, -c * w]
    out = Layer(sp.csr_matrix((vals, ([0] * len(cols), cols)), shape=(1, 6)), np.zeros(1))
    layers.append(out)
    return NeuralNetwork(tuple(layers))


def build_product(spec: ProductSpec) -> NeuralNetwork:
    """Network ``(a, b) -> R(a, b)`` approximating ``ab`` on ``[-kappa, kappa]**2``.

    Value and both partial derivatives are accurate to ``spec.delta``.
    """
    return _build(float(spec.delta), float(spec.kappa))


def product_net(delta: float, kappa: float = 1.0) -> NeuralNetwork:
    return build_product(ProductSpec(delta, kappa))

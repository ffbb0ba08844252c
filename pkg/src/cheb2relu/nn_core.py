"""ReLU network data model, forward evaluation and size accounting.

A network is an immutable sequence of affine layers ``(A_l, b_l)``.  The
ReLU ``max(0, t)`` is applied after every layer except the last one.  Weight
matrices are kept sparse because all complexity statements in this package
count nonzero weights and biases.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import StructuralError

# points evaluated per block; bounds the (units x points) work arrays
_CHUNK = 4096


@dataclass(frozen=True, eq=False)
class Layer:
    """One affine map ``x -> weights @ x + bias``.

    ``weights`` is stored as a CSR matrix with explicit zeros removed and
    sorted column indices, so ``weights.nnz`` is the number of nonzero
    weights in the layer.
    """

    weights: sp.csr_matrix
    bias: np.ndarray

    def __post_init__(self):
        w = sp.csr_matrix(self.weights, dtype=np.float64, copy=True)
        w.eliminate_zeros()
        w.sort_indices()
        b = np.array(self.bias, dtype=np.float64).reshape(-1)
        if b.shape[0] != w.shape[0]:
            raise StructuralError(
                f"bias length {b.shape[0]} does not match weight rows {w.shape[0]}"
            )
        b.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @classmethod
    def from_triplets(cls, rows: int, cols: int, triplets: Iterable[Sequence[float]], bias) -> "Layer":
        trip = np.asarray(list(triplets), dtype=np.float64).reshape(-1, 3)
        i = trip[:, 0].astype(np.int64)
        j = trip[:, 1].astype(np.int64)
        if trip.size and (i.min() < 0 or i.max() >= rows or j.min() < 0 or j.max() >= cols):
            raise StructuralError("triplet index out of range")
        w = sp.coo_matrix((trip[:, 2], (i, j)), shape=(rows, cols)).tocsr()
        return cls(w, bias)

    @classmethod
    def dense(cls, weights, bias) -> "Layer":
        return cls(sp.csr_matrix(np.atleast_2d(np.asarray(weights, dtype=np.float64))), bias)

    @property
    def rows(self) -> int:
        return self.weights.shape[0]

    @property
    def cols(self) -> int:
        return self.weights.shape[1]

    @property
    def nnz(self) -> int:
        return int(self.weights.nnz + np.count_nonzero(self.bias))

    def triplets(self) -> list[list]:
        coo = self.weights.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return [[int(coo.row[k]), int(coo.col[k]), float(coo.data[k])] for k in order]

    def same_as(self, other: "Layer") -> bool:
        """Bitwise equality of shape, sparsity pattern, weights and bias."""
        a, b = self.weights, other.weights
        return (
            a.shape == b.shape
            and np.array_equal(a.indptr, b.indptr)
            and np.array_equal(a.indices, b.indices)
            and np.array_equal(a.data, b.data)
            and np.array_equal(self.bias, other.bias)
        )


@dataclass(frozen=True)
class SizeMetrics:
    depth: int
    size: int
    size_first: int
    size_last: int
    width_max: int


@dataclass(frozen=True, eq=False)
class NeuralNetwork:
    layers: tuple[Layer, ...]

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise StructuralError("a network needs at least one layer")
        for l, (prev, cur) in enumerate(zip(layers[:-1], layers[1:]), start=2):
            if cur.cols != prev.rows:
                raise StructuralError(
                    f"layer {l} expects {cur.cols} inputs but layer {l - 1} has {prev.rows} outputs"
                )
        object.__setattr__(self, "layers", layers)

    @property
    def input_dim(self) -> int:
        return self.layers[0].cols

    @property
    def output_dim(self) -> int:
        return self.layers[-1].rows

    @property
    def depth(self) -> int:
        return len(self.layers)

    @cached_property
    def metrics(self) -> SizeMetrics:
        return metrics(self)

    def __call__(self, x):
        return realize(self, x)

    def hidden_layers(self) -> tuple[Layer, ...]:
        return self.layers[:-1]


def metrics(net: NeuralNetwork) -> SizeMetrics:
    """Depth, number of nonzero weights and biases, and first/last layer counts."""
    per_layer = [layer.nnz for layer in net.layers]
    return SizeMetrics(
        depth=net.depth,
        size=int(sum(per_layer)),
        size_first=per_layer[0],
        size_last=per_layer[-1],
        width_max=max(layer.rows for layer in net.layers),
    )


def _as_batch(net: NeuralNetwork, x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=np.float64)
    d = net.input_dim
    if arr.ndim == 0:
        if d != 1:
            raise StructuralError(f"network expects input of dimension {d}, got a scalar")
        return arr.reshape(1, 1), True
    if arr.ndim == 1:
        if d == 1:
            return arr.reshape(-1, 1), False
        if arr.shape[0] != d:
            raise StructuralError(f"network expects input of dimension {d}, got {arr.shape[0]}")
        return arr.reshape(1, d), True
    if arr.ndim != 2 or arr.shape[1] != d:
        raise StructuralError(f"network expects inputs of shape (n, {d}), got {arr.shape}")
    return arr, False


def realize(net: NeuralNetwork, x) -> np.ndarray:
    """Evaluate the realization ``R(net)``.

    ``x`` may be a single input vector (returns a vector of length
    ``output_dim``), a 1-D array of scalar inputs for a network with one
    input, or an ``(n, input_dim)`` batch.  Batched calls return
    ``(n, output_dim)``.
    """
    batch, single = _as_batch(net, x)
    out = np.empty((batch.shape[0], net.output_dim))
    last = len(net.layers) - 1
    for start in range(0, batch.shape[0], _CHUNK):
        a = batch[start:start + _CHUNK].T
        for l, layer in enumerate(net.layers):
            a = layer.weights @ a + layer.bias[:, None]
            if l < last:
                np.maximum(a, 0.0, out=a)
        out[start:start + _CHUNK] = a.T
    return out[0] if single else out


def realize_jacobian(net: NeuralNetwork, x, side: str = "right") -> tuple[np.ndarray, np.ndarray]:
    """Values and one-sided Jacobians by forward propagation of activation masks.

    The ReLU slope is 1 where the pre-activation is positive and 0 where it
    is negative.  Where a pre-activation is exactly zero the directional
    derivative ``max(dz, 0)`` of the ReLU is used, so each column of the
    result is the exact one-sided partial derivative (``side="right"`` for
    direction ``+e_i``, ``"left"`` for ``-e_i``).  Away from breakpoints
    this is the plain mask rule.

    Returns ``(values, jac)`` with ``values`` of shape ``(n, output_dim)``
    and ``jac`` of shape ``(n, output_dim, input_dim)`` (leading axis dropped
    for a single input vector).
    """
    if side not in ("right", "left"):
        raise ValueError(f"side must be 'right' or 'left', got {side!r}")
    batch, single = _as_batch(net, x)
    vals, jac, _ = _propagate(net, batch, 1.0 if side == "right" else -1.0)
    if single:
        return vals[0], jac[0]
    return vals, jac


def _propagate(net: NeuralNetwork, batch: np.ndarray, sign: float):
    """Values, one-sided Jacobians and a per-point flag for hitting a breakpoint."""
    n, d = batch.shape
    vals = np.empty((n, net.output_dim))
    jac = np.empty((n, net.output_dim, d))
    tied = np.zeros(n, dtype=bool)
    last = len(net.layers) - 1
    for start in range(0, n, _CHUNK):
        x_blk = batch[start:start + _CHUNK].T
        m = x_blk.shape[1]
        # columns [0, m) carry values; column m + p * d + i is direction i at point p
        z = np.hstack([x_blk, np.tile(sign * np.eye(d), (1, m))])
        for l, layer in enumerate(net.layers):
            z = layer.weights @ z
            a, t = z[:, :m], z[:, m:].reshape(z.shape[0], m, d)
            a += layer.bias[:, None]
            if l < last:
                tie = a == 0.0
                if tie.any():
                    tied[start:start + m] |= tie.any(axis=0)
                    np.maximum(t, 0.0, out=t, where=tie[:, :, None])
                    t *= (a >= 0.0)[:, :, None]
                else:
                    t *= (a > 0.0)[:, :, None]
                np.maximum(a, 0.0, out=a)
        vals[start:start + m] = z[:, :m].T
        jac[start:start + m] = sign * z[:, m:].reshape(-1, m, d).transpose(1, 0, 2)
    return vals, jac, tied


def realize_two_sided(net: NeuralNetwork, x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Values with right and left derivatives of a scalar-input network.

    The left pass is repeated only at points where some pre-activation is
    exactly zero; elsewhere both one-sided derivatives coincide.
    """
    if net.input_dim != 1:
        raise StructuralError(f"derivative evaluation needs input_dim 1, got {net.input_dim}")
    pts = np.asarray(x, dtype=np.float64).reshape(-1, 1)
    vals, right, tied = _propagate(net, pts, 1.0)
    left = right.copy()
    if tied.any():
        left[tied] = _propagate(net, pts[tied], -1.0)[1]
    return vals, right[:, :, 0], left[:, :, 0]


def realize_with_derivative(net: NeuralNetwork, x, side: str = "right") -> tuple[np.ndarray, np.ndarray]:
    """Value and one-sided derivative of a network with scalar input.

    For scalar ``x`` returns two vectors of length ``output_dim``; for an
    array of points returns two ``(n, output_dim)`` arrays.  The derivative
    is exact everywhere as a one-sided derivative, and therefore exact
    wherever the realization is differentiable.
    """
    if net.input_dim != 1:
        raise StructuralError(f"derivative evaluation needs input_dim 1, got {net.input_dim}")
    arr = np.asarray(x, dtype=np.float64)
    vals, jac = realize_jacobian(net, arr.reshape(-1, 1), side=side)
    der = jac[:, :, 0]
    if arr.ndim == 0:
        return vals[0], der[0]
    return vals, der


def activation_patterns(net: NeuralNetwork, x) -> np.ndarray:
    """Boolean activation pattern of all hidden units, one row per input."""
    batch, _ = _as_batch(net, x)
    rows = []
    a = batch.T
    for layer in net.hidden_layers():
        a = layer.weights @ a + layer.bias[:, None]
        rows.append(a > 0.0)
        np.maximum(a, 0.0, out=a)
    if not rows:
        return np.zeros((batch.shape[0], 0), dtype=bool)
    return np.vstack(rows).T


# --- serialization -------------------------------------------------------

def to_dict(net: NeuralNetwork) -> dict:
    return {
        "input_dim": net.input_dim,
        "layers": [
            {
                "rows": layer.rows,
                "cols": layer.cols,
                "triplets": layer.triplets(),
                "bias": [float(v) for v in layer.bias],
            }
            for layer in net.layers
        ],
    }


def from_dict(data: dict) -> NeuralNetwork:
    try:
        layers = [
            Layer.from_triplets(int(ld["rows"]), int(ld["cols"]), ld["triplets"], ld["bias"])
            for ld in data["layers"]
        ]
    except (KeyError, TypeError) as exc:
        raise StructuralError(f"malformed network description: {exc}") from exc
    net = NeuralNetwork(tuple(layers))
    if net.input_dim != int(data["input_dim"]):
        raise StructuralError(
            f"declared input_dim {data['input_dim']} but first layer has {net.input_dim} columns"
        )
    return net


def dumps(net: NeuralNetwork) -> str:
    # json writes floats with repr(), the shortest round-trip decimal
    return json.dumps(to_dict(net))


def loads(text: str) -> NeuralNetwork:
    return from_dict(json.loads(text))


def save(net: NeuralNetwork, path) -> None:
    Path(path).write_text(dumps(net))


def load(path) -> NeuralNetwork:
    return loads(Path(path).read_text())

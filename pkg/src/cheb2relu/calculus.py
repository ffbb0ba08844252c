"""Combinators on ReLU networks: parallelization, concatenation, identities."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .errors import StructuralError
from .nn_core import Layer, NeuralNetwork


def affine_net(weights, bias) -> NeuralNetwork:
    """One-layer network realizing ``x -> weights @ x + bias``."""
    w = weights if sp.issparse(weights) else sp.csr_matrix(np.atleast_2d(np.asarray(weights, float)))
    return NeuralNetwork((Layer(w, bias),))


def identity_net(d: int, depth: int) -> NeuralNetwork:
    """Network of the given depth whose realization is the identity on R^d.

    Uses the splitting ``x = relu(x) - relu(-x)``; size is at most ``2 d depth``.
    """
    if d < 1 or depth < 1:
        raise StructuralError(f"identity_net needs d >= 1 and depth >= 1, got ({d}, {depth})")
    eye = sp.identity(d, format="csr")
    zeros = np.zeros(d)
    if depth == 1:
        return NeuralNetwork((Layer(eye, zeros),))
    first = Layer(sp.vstack([eye, -eye], format="csr"), np.zeros(2 * d))
    middle = [Layer(sp.identity(2 * d, format="csr"), np.zeros(2 * d)) for _ in range(depth - 2)]
    last = Layer(sp.hstack([eye, -eye], format="csr"), zeros)
    return NeuralNetwork((first, *middle, last))


def _require_equal_depth(phi1: NeuralNetwork, phi2: NeuralNetwork) -> None:
    if phi1.depth != phi2.depth:
        raise StructuralError(f"networks have different depths {phi1.depth} and {phi2.depth}")


def parallel(phi1: NeuralNetwork, phi2: NeuralNetwork) -> NeuralNetwork:
    """Shared-input parallelization: ``x -> (R(phi1)(x), R(phi2)(x))``."""
    _require_equal_depth(phi1, phi2)
    if phi1.input_dim != phi2.input_dim:
        raise StructuralError(
            f"parallel needs equal input dimensions, got {phi1.input_dim} and {phi2.input_dim}"
        )
    l1, l2 = phi1.layers, phi2.layers
    layers = [
        Layer(
            sp.vstack([l1[0].weights, l2[0].weights], format="csr"),
            np.concatenate([l1[0].bias, l2[0].bias]),
        )
    ]
    layers += [
        Layer(sp.block_diag([a.weights, b.weights], format="csr"), np.concatenate([a.bias, b.bias]))
        for a, b in zip(l1[1:], l2[1:])
    ]
    return NeuralNetwork(tuple(layers))


def full_parallel(phi1: NeuralNetwork, phi2: NeuralNetwork) -> NeuralNetwork:
    """Separate-input parallelization: ``(x1, x2) -> (R(phi1)(x1), R(phi2)(x2))``."""
    _require_equal_depth(phi1, phi2)
    return NeuralNetwork(tuple(
        Layer(sp.block_diag([a.weights, b.weights], format="csr"), np.concatenate([a.bias, b.bias]))
        for a, b in zip(phi1.layers, phi2.layers)
    ))


def parallel_many(nets) -> NeuralNetwork:
    """n-ary :func:`parallel`; builds the same layers as the left fold in one pass."""
    nets = list(nets)
    if len(nets) == 1:
        return nets[0]
    for other in nets[1:]:
        _require_equal_depth(nets[0], other)
        if other.input_dim != nets[0].input_dim:
            raise StructuralError("parallel needs equal input dimensions")
    first = Layer(
        sp.vstack([n.layers[0].weights for n in nets], format="csr"),
        np.concatenate([n.layers[0].bias for n in nets]),
    )
    return NeuralNetwork((first, *_block_layers(nets, start=1)))


def full_parallel_many(nets) -> NeuralNetwork:
    """n-ary :func:`full_parallel`; same layers as the left fold."""
    nets = list(nets)
    if len(nets) == 1:
        return nets[0]
    for other in nets[1:]:
        _require_equal_depth(nets[0], other)
    return NeuralNetwork(tuple(_block_layers(nets, start=0)))


def _block_layers(nets, start: int) -> list[Layer]:
    return [
        Layer(
            sp.block_diag([n.layers[l].weights for n in nets], format="csr"),
            np.concatenate([n.layers[l].bias for n in nets]),
        )
        for l in range(start, nets[0].depth)
    ]


def _require_composable(phi1: NeuralNetwork, phi2: NeuralNetwork) -> None:
    if phi1.input_dim != phi2.output_dim:
        raise StructuralError(
            f"cannot compose: outer network takes {phi1.input_dim} inputs, "
            f"inner network produces {phi2.output_dim}"
        )


def concat(phi1: NeuralNetwork, phi2: NeuralNetwork) -> NeuralNetwork:
    """Plain concatenation realizing ``R(phi1) o R(phi2)``.

    The last layer of ``phi2`` and the first layer of ``phi1`` are merged
    into one affine map, so the depth is ``L1 + L2 - 1``.
    """
    _require_composable(phi1, phi2)
    inner, outer = phi2.layers[-1], phi1.layers[0]
    merged = Layer(outer.weights @ inner.weights, outer.weights @ inner.bias + outer.bias)
    return NeuralNetwork((*phi2.layers[:-1], merged, *phi1.layers[1:]))


def sparse_concat(phi1: NeuralNetwork, phi2: NeuralNetwork) -> NeuralNetwork:
    """Sparse concatenation realizing ``R(phi1) o R(phi2)`` with depth ``L1 + L2``.

    The interface is routed through ``t = relu(t) - relu(-t)``, which avoids
    forming the product of the two adjacent weight matrices.
    """
    _require_composable(phi1, phi2)
    inner, outer = phi2.layers[-1], phi1.layers[0]
    split = Layer(
        sp.vstack([inner.weights, -inner.weights], format="csr"),
        np.concatenate([inner.bias, -inner.bias]),
    )
    join = Layer(sp.hstack([outer.weights, -outer.weights], format="csr"), outer.bias)
    return NeuralNetwork((*phi2.layers[:-1], split, join, *phi1.layers[1:]))

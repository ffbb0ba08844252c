"""Built-in target functions with their derivatives.

Names: ``T<k>`` (Chebyshev polynomial on [-1, 1]), ``sin2pix``, ``runge``,
``xpow<alpha>`` and ``absx``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev as npcheb

from .errors import ParameterError

Array = np.ndarray


@dataclass(frozen=True)
class Expression:
    name: str
    f: Callable[[Array], Array]
    df: Callable[[Array], Array]

    def __call__(self, x):
        return self.f(np.asarray(x, dtype=np.float64))


def _cheb(k: int) -> Expression:
    c = np.zeros(k + 1)
    c[k] = 1.0
    dc = npcheb.chebder(c) if k else np.zeros(1)
    return Expression(f"T{k}", lambda x: npcheb.chebval(x, c), lambda x: npcheb.chebval(x, dc))


def _xpow(alpha: float) -> Expression:
    def df(x):
        with np.errstate(divide="ignore"):
            return alpha * np.power(x, alpha - 1.0)

    return Expression(f"xpow{alpha:g}", lambda x: np.power(x, alpha), df)


_FIXED = {
    "sin2pix": Expression(
        "sin2pix",
        lambda x: np.sin(2.0 * np.pi * x),
        lambda x: 2.0 * np.pi * np.cos(2.0 * np.pi * x),
    ),
    "runge": Expression(
        "runge",
        lambda x: 1.0 / (1.0 + 25.0 * x * x),
        lambda x: -50.0 * x / (1.0 + 25.0 * x * x) ** 2,
    ),
    "absx": Expression("absx", np.abs, np.sign),
}

_NUMBER = r"[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?"


def builtin(name: str) -> Expression:
    """Look up a built-in expression by name."""
    name = name.strip()
    if name in _FIXED:
        return _FIXED[name]
    if m := re.fullmatch(r"T([0-9]+)", name):
        return _cheb(int(m.group(1)))
    if m := re.fullmatch(rf"xpow({_NUMBER})", name):
        alpha = float(m.group(1))
        if alpha <= 0.0:
            raise ParameterError("xpow exponent must be positive")
        return _xpow(alpha)
    raise ParameterError(
        f"unknown expression {name!r}; expected T<k>, sin2pix, runge, xpow<alpha> or absx"
    )

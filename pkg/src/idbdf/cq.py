"""Fractional convolution-quadrature weights for BDF generating symbols.

The k-step BDF method (k = 1, 2, 3) has the generating polynomial

    delta(xi) = c_0 + c_1 xi + ... + c_k xi^k = sum_{i=1}^{k} (1 - xi)^i / i,

and the weights of the fractional-order operator of order ``beta`` are the
Maclaurin coefficients of ``delta(xi)**beta``.  Tables are stored without the
``tau**-beta`` time-step scale; the caller applies it once.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = ["BdfSymbol", "WeightTable", "bdf_symbol", "frac_weights", "symbol_error"]

_SYMBOL_COEFFS = {
    1: (1.0, -1.0),
    2: (1.5, -2.0, 0.5),
    3: (11.0 / 6.0, -3.0, 1.5, -1.0 / 3.0),
}


@dataclass(frozen=True)
class BdfSymbol:
    """Generating polynomial of a k-step BDF method, coefficients in ascending powers."""

    k: int
    coeffs: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.k not in _SYMBOL_COEFFS:
            raise ValueError(f"unsupported BDF order k={self.k}; supported: 1, 2, 3")
        if self.coeffs[0] <= 0:
            raise ValueError("leading symbol coefficient must be positive")


@dataclass(frozen=True, eq=False)
class WeightTable:
    """Weights w_j of delta(xi)**beta for one BDF symbol, j = 0..n_max."""

    k: int
    beta: float
    n_max: int
    w: np.ndarray

    def __len__(self) -> int:
        return self.w.size


def bdf_symbol(k: int) -> BdfSymbol:
    """Return the BDF-k generating polynomial (times tau)."""
    if k not in _SYMBOL_COEFFS:
        raise ValueError(f"unsupported BDF order k={k}; supported: 1, 2, 3")
    return BdfSymbol(k=k, coeffs=_SYMBOL_COEFFS[k])


@lru_cache(maxsize=128)
def _weights_array(k: int, beta: float, n_max: int) -> np.ndarray:
    coeffs = _SYMBOL_COEFFS[k]
    if float(beta).is_integer() and beta >= 0:
        # exact polynomial power; keeps e.g. beta=1 bit-identical to the symbol
        w = np.zeros(n_max + 1)
        w[0] = 1.0
        p = np.asarray(coeffs)
        for _ in range(int(beta)):
            w = np.convolve(w[: n_max + 1], p)[: n_max + 1]
        out = np.zeros(n_max + 1)
        out[: w.size] = w
    else:
        # power-series power recurrence on (1 + p(xi))**beta, p(0) = 0
        g = np.asarray(coeffs) / coeffs[0]
        h = np.zeros(n_max + 1)
        h[0] = 1.0
        for n in range(1, n_max + 1):
            s = 0.0
            for i in range(1, min(n, k) + 1):
                s += (i * (beta + 1.0) - n) * g[i] * h[n - i]
            h[n] = s / n
        out = coeffs[0] ** beta * h
    out.setflags(write=False)
    return out


def frac_weights(k: int, beta: float, n_max: int) -> WeightTable:
    """Weights of the order-``beta`` power of the BDF-k symbol, j = 0..n_max.

    ``beta`` may be negative (quadrature weights of the |beta|-fold integral).
    Cost is O(k * n_max); the returned array is read-only and cached.
    """
    if k not in _SYMBOL_COEFFS:
        raise ValueError(f"unsupported BDF order k={k}; supported: 1, 2, 3")
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    return WeightTable(k=k, beta=float(beta), n_max=n_max,
                       w=_weights_array(k, float(beta), n_max))


def symbol_error(k: int, alpha: float, z: complex, tau: float) -> float:
    """|delta(e^{-z tau})**alpha / tau**alpha - z**alpha|.

    The symbol is evaluated through y = 1 - e^{-z tau} (via expm1) so the
    near-cancellation at small z*tau does not pollute the O(tau^k) decay
    that callers measure.
    """
    if k not in _SYMBOL_COEFFS:
        raise ValueError(f"unsupported BDF order k={k}; supported: 1, 2, 3")
    y = -np.expm1(-z * tau)
    acc = 0.0 + 0.0j
    for i in range(k, 0, -1):
        acc = (acc + 1.0 / i) * y
    delta_tau = acc / tau
    return float(abs(delta_tau**alpha - z**alpha))

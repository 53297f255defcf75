"""Dirichlet-Laplacian eigenbasis on (0, 1): phi_j(x) = sqrt(2) sin(j pi x).

The basis is orthonormal in L2(0,1) with eigenvalues -(j pi)^2, so fields are
carried as coefficient vectors and norms are Parseval sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["ModeField", "project", "l2_norm", "eigenvalue", "eigenvalues"]

DEFAULT_QUAD_POINTS = 2**14


@dataclass(frozen=True, eq=False)
class ModeField:
    """Coefficients of a function on (0,1) in the sine eigenbasis, modes 1..J."""

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.coeffs, dtype=float)
        object.__setattr__(self, "coeffs", c)
        if c.ndim != 1:
            raise ValueError("ModeField coefficients must be one-dimensional")

    @property
    def J(self) -> int:
        return self.coeffs.size


def eigenvalue(j: int) -> float:
    """Eigenvalue (j pi)^2 of -Laplacian with Dirichlet conditions on (0,1)."""
    if j < 1:
        raise ValueError("mode index must be >= 1")
    return (j * math.pi) ** 2


def eigenvalues(J: int) -> np.ndarray:
    """Vector of (j pi)^2 for j = 1..J."""
    return (np.arange(1, J + 1) * math.pi) ** 2


def project(f: Callable[[np.ndarray], np.ndarray], J: int,
            quad_points: int = DEFAULT_QUAD_POINTS) -> ModeField:
    """L2 projection of ``f`` onto the first J eigenmodes.

    Composite-trapezoid quadrature with ``quad_points`` panels; the endpoint
    factors sin(j pi x) vanish, so the smooth test data of the experiments is
    integrated to well below 1e-8.
    """
    if quad_points < 4 * J:
        raise ValueError(f"quad_points={quad_points} too small; need >= 4*J = {4 * J}")
    x = np.linspace(0.0, 1.0, quad_points + 1)
    fx = np.asarray(f(x), dtype=float)
    wq = np.full(quad_points + 1, 1.0 / quad_points)
    wq[0] = wq[-1] = 0.5 / quad_points
    js = np.arange(1, J + 1)
    basis = math.sqrt(2.0) * np.sin(np.pi * np.outer(js, x))
    return ModeField(coeffs=basis @ (fx * wq))


def l2_norm(u: ModeField) -> float:
    """Parseval norm sqrt(sum of squared coefficients)."""
    c = u.coeffs
    return float(math.sqrt(c @ c))

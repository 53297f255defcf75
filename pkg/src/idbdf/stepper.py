"""Time stepping of the ID-BDF schemes for the transformed unknown V.

V(t) = u(t) - v - t*b solves a fractional evolution equation whose right-hand
side carries the initial data as discrete derivatives of polynomial-in-time
terms plus a fractional derivative of the folded noise.  The spatial operator
is diagonal in the sine eigenbasis, so each mode satisfies an independent
scalar convolution recursion:

    (tau**-a w0_a + lam_j) V_j^n = -tau**-a sum_{i=1..n} w_i_a V_j^{n-i}
                                   + rhs_init_j(n)
                                   + tau**-(m-g) sum_{i=0..n} w_i_{m-g} g_j(t_{n-i})

with V^0 = 0.  History sums are evaluated directly (O(N^2) per mode), with
ascending index order for reproducibility.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .cq import frac_weights
from .spectral import ModeField, eigenvalues

__all__ = ["SchemeSpec", "ProblemSpec", "SCHEME_TABLE", "BDF3_ALPHA_STAR",
           "rhs_initial", "step_all", "reconstruct_u"]

# scheme name -> (BDF order k, fold count m)
SCHEME_TABLE = {
    "id1-bdf2": (2, 1),
    "id2-bdf2": (2, 2),
    "id3-bdf3": (3, 3),
}

# BDF3 is A(theta)-stable with theta ~ 86.03 deg, unconditional only for
# fractional orders below pi / (pi - theta) ~ 1.91
BDF3_ALPHA_STAR = 1.91


@dataclass(frozen=True)
class SchemeSpec:
    """One member of the ID-BDF family: orders plus fractional parameters."""

    name: str
    k: int
    m: int
    alpha: float
    gamma: float

    def __post_init__(self) -> None:
        expected = SCHEME_TABLE.get(self.name)
        if expected is None:
            raise ValueError(
                f"unknown scheme {self.name!r}; choose from {sorted(SCHEME_TABLE)}"
            )
        if (self.k, self.m) != expected:
            raise ValueError(
                f"scheme {self.name} requires (k, m) = {expected}, got "
                f"({self.k}, {self.m})"
            )
        if not 0.0 < self.alpha < 2.0 or self.alpha == 1.0:
            raise ValueError(f"alpha={self.alpha} must lie in (0, 2) excluding 1")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma={self.gamma} must lie in (0, 1)")

    @classmethod
    def from_name(cls, name: str, alpha: float, gamma: float) -> "SchemeSpec":
        key = name.lower()
        if key not in SCHEME_TABLE:
            raise ValueError(
                f"unknown scheme {name!r}; choose from {sorted(SCHEME_TABLE)}"
            )
        k, m = SCHEME_TABLE[key]
        return cls(name=key, k=k, m=m, alpha=alpha, gamma=gamma)

    @property
    def data_deriv_order(self) -> int:
        """Order of the discrete derivative applied to the initial-data terms."""
        return 1 if self.k == 2 else 2

    @property
    def noise_deriv_order(self) -> float:
        """Order m - gamma of the discrete derivative applied to the folded noise."""
        return self.m - self.gamma

    @property
    def stability_warning(self) -> bool:
        """True when BDF3 is only conditionally stable at this alpha."""
        return self.name == "id3-bdf3" and self.alpha >= BDF3_ALPHA_STAR


@dataclass(frozen=True)
class ProblemSpec:
    """Initial data in the eigenbasis plus the coarse time grid."""

    initial_value: ModeField
    initial_velocity: ModeField
    J: int
    T: float
    N: int

    def __post_init__(self) -> None:
        if self.initial_value.J != self.J or self.initial_velocity.J != self.J:
            raise ValueError("initial data mode counts must equal J")
        if self.T <= 0.0:
            raise ValueError("final time T must be positive")

    def validate_for(self, scheme: SchemeSpec) -> None:
        if self.N < scheme.k:
            raise ValueError(f"N={self.N} must be >= BDF order k={scheme.k}")

    @property
    def tau(self) -> float:
        return self.T / self.N

    def times(self) -> np.ndarray:
        return self.tau * np.arange(self.N + 1)


def _data_deriv_sequences(scheme: SchemeSpec, problem: ProblemSpec):
    """Discrete derivative of the two polynomial data terms on the full grid.

    Returns (dv, db) with dv[n] the order-d derivative at t_n of the
    polynomial multiplying the initial value (t for d=1, t^2/2 for d=2) and
    db[n] the one multiplying the initial velocity (t^2/2, resp. t^3/6).
    """
    d = scheme.data_deriv_order
    tau = problem.tau
    t = problem.times()
    if d == 1:
        pv, pb = t, t**2 / 2.0
    else:
        pv, pb = t**2 / 2.0, t**3 / 6.0
    wd = frac_weights(scheme.k, float(d), problem.N).w
    dv = tau ** (-d) * fftconvolve(wd, pv)[: problem.N + 1]
    db = tau ** (-d) * fftconvolve(wd, pb)[: problem.N + 1]
    return dv, db


def rhs_initial(scheme: SchemeSpec, problem: ProblemSpec, n: int) -> ModeField:
    """Initial-data forcing at step n: per mode, -lam_j times the discrete
    derivative of the polynomial data terms."""
    if not 1 <= n <= problem.N:
        raise ValueError(f"step index n={n} outside 1..{problem.N}")
    problem.validate_for(scheme)
    dv, db = _data_deriv_sequences(scheme, problem)
    lam = eigenvalues(problem.J)
    c = -lam * (problem.initial_value.coeffs * dv[n]
                + problem.initial_velocity.coeffs * db[n])
    return ModeField(coeffs=c)


def step_all(scheme: SchemeSpec, problem: ProblemSpec, g: np.ndarray) -> np.ndarray:
    """Run the recursion for all modes; returns V of shape (N+1, J).

    ``g`` holds the folded noise per mode at the coarse nodes, shape
    (J, N+1); row j drives mode j+1.  Row n of the result is the coefficient
    vector of V at t_n (V^0 = 0).
    """
    problem.validate_for(scheme)
    N, J, tau = problem.N, problem.J, problem.tau
    g = np.asarray(g, dtype=float)
    if g.shape != (J, N + 1):
        raise ValueError(f"folded noise shape {g.shape} must be (J, N+1) = ({J}, {N + 1})")

    lam = eigenvalues(J)
    wal = frac_weights(scheme.k, scheme.alpha, N).w
    wn = frac_weights(scheme.k, scheme.noise_deriv_order, N).w
    dv, db = _data_deriv_sequences(scheme, problem)

    # full forcing per step: initial-data term plus discrete noise derivative
    noise = tau ** (-scheme.noise_deriv_order) * fftconvolve(
        g, wn[None, :], axes=1)[:, : N + 1]
    rhs = (-lam[None, :] * (np.outer(dv, problem.initial_value.coeffs)
                            + np.outer(db, problem.initial_velocity.coeffs))
           + noise.T)

    ta = tau ** (-scheme.alpha)
    den = ta * wal[0] + lam
    if np.any(den <= 0.0):
        raise RuntimeError("non-positive diagonal in the mode solve")
    V = np.zeros((N + 1, J))
    wrev = np.ascontiguousarray(wal[1:][::-1])  # wrev[N-n:] @ V[:n] = history sum
    for n in range(1, N + 1):
        hist = wrev[N - n:] @ V[:n]
        V[n] = (rhs[n] - ta * hist) / den
    return V


def reconstruct_u(V: np.ndarray, problem: ProblemSpec) -> np.ndarray:
    """Undo the unknown transform: u^n = V^n + initial_value + t_n * initial_velocity."""
    t = problem.times()
    return (V + problem.initial_value.coeffs[None, :]
            + t[:, None] * problem.initial_velocity.coeffs[None, :])

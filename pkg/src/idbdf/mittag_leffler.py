"""Two-parameter Mittag-Leffler function E_{a,b}(z) for real arguments.

Serves as the closed-form oracle for the per-mode fractional dynamics: the
deterministic single-mode solution is a combination of E_{a,1} and E_{a,2}
at z = -lambda * t**a, so only a in (0, 2], b > 0 and z on the negative half
axis (plus small positive z for cross-checks) are supported.

Evaluation strategy per query:

* power series  sum_k z^k / Gamma(a k + b)  for z >= -series_cutoff, summed
  in float64 when the predicted alternating-series roundoff stays below the
  tolerance, otherwise in mpmath with working precision scaled to the largest
  term;
* algebraic asymptotic series  -sum_k z^-k / Gamma(b - a k)  truncated at its
  smallest term for z < -series_cutoff, plus the conjugate-pair exponential
  contribution when a >= 1 (it decays only like exp(-|z|^(1/a) |cos(pi/a)|)
  and is numerically visible at moderate |z|);
* when the asymptotic floor exceeds the tolerance, fall back to the extended
  precision series.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import mpmath
from scipy.special import gammaln, rgamma

__all__ = ["MlQuery", "MlResult", "ml", "evaluate", "SERIES_CUTOFF"]

SERIES_CUTOFF = 20.0

_F64_EPS = 1.2e-16
_TERM_BUDGET = 200_000


@dataclass(frozen=True)
class MlQuery:
    """One evaluation request: E_{a,b}(z) to absolute tolerance tol."""

    a: float
    b: float
    z: float
    tol: float = 1e-12

    def __post_init__(self) -> None:
        if not 0.0 < self.a <= 2.0:
            raise ValueError(f"a={self.a} outside supported range (0, 2]")
        if self.b <= 0.0:
            raise ValueError(f"b={self.b} must be positive")
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")
        if self.z > SERIES_CUTOFF:
            raise ValueError(
                f"z={self.z} in the exponential-growth region is not supported"
            )


@dataclass(frozen=True)
class MlResult:
    """Value plus the accuracy estimate actually achieved (absolute)."""

    value: float
    accuracy: float
    branch: str


def _maxterm_log10(a: float, b: float, z: float) -> float:
    """log10 of the largest series term, by direct scan in log space."""
    az = abs(z)
    if az <= 1.0:
        return max(0.0, -gammaln(b) / math.log(10.0))
    lz = math.log(az)
    best = -math.inf
    k = 0
    while k < _TERM_BUDGET:
        val = k * lz - gammaln(a * k + b)
        if val > best:
            best = val
        elif val < best - 10.0:
            break
        k += 1
    return best / math.log(10.0)


def _series_f64(a: float, b: float, z: float, tol: float) -> float:
    s = 0.0
    prev = math.inf
    lz = math.log(abs(z)) if z != 0.0 else -math.inf
    sign = -1.0 if z < 0.0 else 1.0
    for k in range(_TERM_BUDGET):
        lt = k * lz - gammaln(a * k + b) if k > 0 else -gammaln(b)
        term = (sign**k) * math.exp(lt)
        s += term
        at = abs(term)
        if k > 0 and at < 0.01 * tol and at <= prev:
            break
        prev = at
    return s


def _series_mp(a: float, b: float, z: float, extra_digits: float) -> float:
    dps = 30 + int(math.ceil(max(0.0, extra_digits)))
    with mpmath.workdps(dps):
        aa, bb, zz = mpmath.mpf(a), mpmath.mpf(b), mpmath.mpf(z)
        s = mpmath.mpf(0)
        stop = mpmath.mpf(10) ** (-dps + 5)
        prev = mpmath.inf
        for k in range(_TERM_BUDGET):
            term = zz**k / mpmath.gamma(aa * k + bb)
            s += term
            at = abs(term)
            if k > 0 and at < stop and at <= prev:
                break
            prev = at
        return float(s)


def _asymptotic_scan(a: float, b: float, z: float):
    """Algebraic terms -z^-k / Gamma(b - a k) up to the smallest one.

    Returns (partial sum, smallest |term| retained).  Terms are generated in
    log space so the factorial growth of 1/Gamma at negative arguments never
    overflows; terms at (near-)poles of Gamma vanish and are skipped.
    """
    lx = math.log(-z)
    total = 0.0
    smallest = math.inf
    k = 1
    while k < 400:
        x = b - a * k
        if x > 0.5:
            t = (z**-k) * rgamma(x)
            at = abs(t)
        else:
            sin_pix = math.sin(math.pi * x)
            if abs(sin_pix) < 1e-12:
                k += 1
                continue
            # reflection: 1/Gamma(x) = Gamma(1-x) sin(pi x) / pi
            lt = -k * lx + gammaln(1.0 - x) + math.log(abs(sin_pix)) - math.log(math.pi)
            at = math.exp(lt)
            t = math.copysign(at, sin_pix) * (-1.0) ** (k % 2)
        if at == 0.0:
            k += 1
            continue
        if at > smallest and k > 2:
            break
        total -= t
        smallest = min(smallest, at)
        if at < 1e-18:
            break
        k += 1
    return total, smallest


def _exp_pair(a: float, b: float, z: float) -> tuple[float, float]:
    """Saddle-point exponential term(s) for a in [1, 2), real z < 0.

    Returns (contribution, magnitude of the neglected O(1/Z) correction).
    """
    x = -z
    r = x ** (1.0 / a)
    Z = r * cmath.exp(1j * math.pi / a)
    if Z.real < -700.0:
        return 0.0, 0.0
    coef = (1.0 if a == 1.0 else 2.0) / a
    val = coef * (Z ** (1.0 - b) * cmath.exp(Z)).real
    mag = coef * (r ** (1.0 - b)) * math.exp(Z.real)
    return val, mag / r


def evaluate(q: MlQuery, series_cutoff: float = SERIES_CUTOFF) -> MlResult:
    """Evaluate one query, reporting the achieved-accuracy estimate."""
    a, b, z, tol = q.a, q.b, q.z, q.tol
    if z == 0.0:
        return MlResult(value=float(rgamma(b)), accuracy=_F64_EPS, branch="series")

    mt10 = _maxterm_log10(a, b, z)
    cancellation = (10.0**mt10) * 300.0 * _F64_EPS if z < 0.0 else 10.0 * _F64_EPS

    if z < -series_cutoff and a < 2.0:
        alg, smallest = _asymptotic_scan(a, b, z)
        floor = 3.0 * smallest
        if a >= 1.0:
            pair, corr = _exp_pair(a, b, z)
            alg += pair
            floor += corr
        if floor <= tol:
            return MlResult(value=alg, accuracy=max(floor, _F64_EPS), branch="asymptotic")

    if cancellation <= 0.5 * tol:
        return MlResult(value=_series_f64(a, b, z, tol),
                        accuracy=max(tol, cancellation), branch="series")
    return MlResult(value=_series_mp(a, b, z, mt10), accuracy=tol, branch="series-mp")


def ml(a: float, b: float, z: float, tol: float = 1e-12,
       series_cutoff: float = SERIES_CUTOFF) -> float:
    """E_{a,b}(z) for a in (0,2], b > 0, z <= series_cutoff."""
    return evaluate(MlQuery(a=a, b=b, z=z, tol=tol), series_cutoff=series_cutoff).value

"""Brownian driving paths on a fine reference grid and their time folds.

Each (seed, trajectory, mode) triple owns an independent Philox counter
substream, so path sets are reproducible bit-for-bit, independent of thread
scheduling, and nested in the truncation level: raising the number of modes
never changes the paths of existing modes.

The m-fold time-integrated noise g(t) (convolution of the mode's white noise
with t**(m-1)/(m-1)!) is computed on the fine grid by the BDF-k integral
convolution quadrature and restricted to coarse nodes, so solutions at every
coarse resolution are driven by restrictions of one and the same fine path.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np
from numpy.random import Generator, Philox
from scipy.signal import fftconvolve

from .cq import frac_weights

__all__ = [
    "NoiseSpec", "NoisePathSet", "inverse_square", "sample_paths",
    "mode_increments", "fold_noise", "fold_trajectory", "dump_paths", "load_paths",
]

_MAGIC = b"IDBDFNZ1"
_TRACE_TOL = 1e-6
# cap on increments held in memory at once when streaming mode blocks
_BLOCK_BUDGET = 2**24


def inverse_square(j: int) -> float:
    """Default per-mode noise amplitude j**-2 (trace class)."""
    return float(j) ** -2.0


@dataclass(frozen=True)
class NoiseSpec:
    """Truncation level, amplitude rule, fine grid, and seed of one noise field."""

    l: int
    fine_steps: int
    T: float = 1.0
    seed: int = 0
    sigma: Callable[[int], float] = inverse_square

    def __post_init__(self) -> None:
        if self.l < 1:
            raise ValueError("truncation level l must be >= 1")
        n = self.fine_steps
        if n < 1 or n & (n - 1):
            raise ValueError(f"fine_steps={n} must be a power of two")
        if self.T <= 0.0:
            raise ValueError("final time T must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if self.l >= 2 and (self.sigma(self.l) ** 2 >= self.sigma(self.l - 1) ** 2
                            or self.sigma(self.l) == 0.0):
            raise ValueError("sigma_j**2 must decay: noise must be trace class")

    def tail_estimate(self) -> float:
        """Geometric-ratio estimate of sum sigma_j**2 over the modes beyond l.

        Converged specs (experiment scale) keep this below 1e-6; small
        truncation levels used in unit checks may legitimately exceed it.
        """
        if self.l < 2:
            return math.inf
        s_prev = self.sigma(self.l - 1) ** 2
        s_last = self.sigma(self.l) ** 2
        r = s_last / s_prev
        return s_last * r / (1.0 - r)

    @property
    def tau_bar(self) -> float:
        return self.T / self.fine_steps

    def sigma_vector(self) -> np.ndarray:
        return np.array([self.sigma(j) for j in range(1, self.l + 1)])


@dataclass(frozen=True, eq=False)
class NoisePathSet:
    """Brownian increments of all modes of one trajectory on the fine grid."""

    spec: NoiseSpec
    increments: np.ndarray  # (l, fine_steps), entry ~ Normal(0, tau_bar)
    trajectory: int = 0

    def __post_init__(self) -> None:
        inc = np.asarray(self.increments, dtype=float)
        if inc.shape != (self.spec.l, self.spec.fine_steps):
            raise ValueError(
                f"increments shape {inc.shape} does not match "
                f"(l, fine_steps) = ({self.spec.l}, {self.spec.fine_steps})"
            )
        object.__setattr__(self, "increments", inc)


def _substream(seed: int, trajectory: int, mode: int) -> Generator:
    if not 0 <= trajectory < 2**32 or not 0 <= mode < 2**32:
        raise ValueError("trajectory and mode indices must fit in 32 bits")
    key = (int(seed) << 64) | (int(trajectory) << 32) | int(mode)
    return Generator(Philox(key=key))


def mode_increments(spec: NoiseSpec, mode: int, trajectory: int = 0) -> np.ndarray:
    """Increments of mode ``mode`` (1-based), a pure function of (seed, trajectory, mode)."""
    if mode < 1:
        raise ValueError("mode index must be >= 1")
    gen = _substream(spec.seed, trajectory, mode)
    return gen.standard_normal(spec.fine_steps) * math.sqrt(spec.tau_bar)


def sample_paths(spec: NoiseSpec, trajectory: int = 0) -> NoisePathSet:
    """Materialize all l mode rows of one trajectory."""
    inc = np.empty((spec.l, spec.fine_steps))
    for j in range(1, spec.l + 1):
        inc[j - 1] = mode_increments(spec, j, trajectory)
    return NoisePathSet(spec=spec, increments=inc, trajectory=trajectory)


def _fold_rows(increments: np.ndarray, m: int, k: int, tau_bar: float) -> np.ndarray:
    """Fine-grid fold of raw increment rows; returns (rows, fine_steps + 1).

    m = 1 gives the Brownian path itself; m >= 2 applies the BDF-k integral
    quadrature of order m - 1 to it.
    """
    nbar = increments.shape[1]
    W = np.concatenate(
        [np.zeros((increments.shape[0], 1)), np.cumsum(increments, axis=1)], axis=1
    )
    if m == 1:
        return W
    w = frac_weights(k, -(m - 1), nbar).w
    return fftconvolve(W, w[None, :], axes=1)[:, : nbar + 1] * tau_bar ** (m - 1)


def _check_fold_args(spec: NoiseSpec, m: int, k: int, coarse_N: int) -> None:
    if m not in (1, 2, 3):
        raise ValueError(f"fold count m={m} not in (1, 2, 3)")
    if k not in (1, 2, 3):
        raise ValueError(f"BDF order k={k} not in (1, 2, 3)")
    if coarse_N < 1 or spec.fine_steps % coarse_N:
        raise ValueError(
            f"coarse step count {coarse_N} must divide fine_steps={spec.fine_steps}"
        )


def fold_noise(paths: NoisePathSet, m: int, k: int, coarse_N: int) -> np.ndarray:
    """Per-mode folded noise g_j(t_n), shape (l, coarse_N + 1), amplitudes applied."""
    spec = paths.spec
    _check_fold_args(spec, m, k, coarse_N)
    G = _fold_rows(paths.increments, m, k, spec.tau_bar)
    stride = spec.fine_steps // coarse_N
    return spec.sigma_vector()[:, None] * G[:, ::stride]


def fold_trajectory(spec: NoiseSpec, trajectory: int, m: int, k: int,
                    coarse_Ns: Iterable[int]) -> Mapping[int, np.ndarray]:
    """Folded noise of one trajectory at several coarse resolutions.

    Streams the fine grid in mode blocks, so memory stays bounded for large
    fine grids; all resolutions are cut from the same fine-grid fold, which
    makes values at shared time points identical across resolutions.
    """
    Ns = sorted(set(int(N) for N in coarse_Ns))
    for N in Ns:
        _check_fold_args(spec, m, k, N)
    sig = spec.sigma_vector()
    out = {N: np.empty((spec.l, N + 1)) for N in Ns}
    block = max(1, min(spec.l, _BLOCK_BUDGET // spec.fine_steps))
    for j0 in range(0, spec.l, block):
        j1 = min(j0 + block, spec.l)
        inc = np.empty((j1 - j0, spec.fine_steps))
        for j in range(j0, j1):
            inc[j - j0] = mode_increments(spec, j + 1, trajectory)
        G = _fold_rows(inc, m, k, spec.tau_bar)
        for N in Ns:
            stride = spec.fine_steps // N
            out[N][j0:j1] = sig[j0:j1, None] * G[:, ::stride]
    return out


def dump_paths(paths: NoisePathSet, path: str) -> None:
    """Write a path set to a flat binary file for debugging replay.

    Layout: 8-byte magic, then l, fine_steps, seed as little-endian uint64,
    then the increments row-major as binary64.
    """
    spec = paths.spec
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<QQQ", spec.l, spec.fine_steps, spec.seed))
        fh.write(np.ascontiguousarray(paths.increments, dtype="<f8").tobytes())


def load_paths(path: str, T: float = 1.0, trajectory: int = 0,
               sigma: Callable[[int], float] = inverse_square) -> NoisePathSet:
    """Read a path set written by dump_paths.

    The header carries only (l, fine_steps, seed); final time, trajectory
    index, and the amplitude rule are not serialized and must be re-supplied.
    """
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _MAGIC:
            raise ValueError(f"not a noise path file (bad magic {magic!r})")
        l, fine_steps, seed = struct.unpack("<QQQ", fh.read(24))
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != l * fine_steps:
        raise ValueError("truncated noise path file")
    spec = NoiseSpec(l=int(l), fine_steps=int(fine_steps), T=T, seed=int(seed),
                     sigma=sigma)
    return NoisePathSet(spec=spec, increments=data.reshape(int(l), int(fine_steps)),
                        trajectory=trajectory)

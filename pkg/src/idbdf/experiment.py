"""Monte Carlo convergence sweeps, truncation studies, and report emission.

The error estimator couples successive resolutions through one fine path per
trajectory: with e_N = sqrt(mean ||u^{N/2} - u^N||^2) over trajectories, the
observed order is log2(e_{N/2 pair} / e_{N pair}).  Everything is a pure
function of the configuration: per-trajectory squared norms are collected
into an array indexed by trajectory and reduced in one fixed-order sum, so
reports are byte-identical for any worker count.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .mittag_leffler import ml
from .noise import NoiseSpec, fold_trajectory
from .spectral import ModeField, eigenvalue, project
from .stepper import SCHEME_TABLE, ProblemSpec, SchemeSpec, step_all

__all__ = [
    "ConfigError", "ExperimentConfig", "CellResult", "ConvergenceReport",
    "TruncationRow", "TruncationReport", "DeterministicOrderResult",
    "run_sweep", "emit_report", "truncation_study", "emit_truncation",
    "deterministic_order_study", "initial_value_profile", "initial_velocity_profile",
]

_FORMATS = ("csv", "tsv", "json-lines")
_TRACE_TOL = 1e-6


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 2)."""


def initial_value_profile(x: np.ndarray) -> np.ndarray:
    """Reference initial value sin(x) sqrt(1 - x^2) of the rate experiments."""
    return np.sin(x) * np.sqrt(np.clip(1.0 - x**2, 0.0, None))


def initial_velocity_profile(x: np.ndarray) -> np.ndarray:
    """Reference initial velocity cos(x) sqrt(1 - x^2)."""
    return np.cos(x) * np.sqrt(np.clip(1.0 - x**2, 0.0, None))


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one sweep; reports are pure functions of it."""

    scheme: str = "id2-bdf2"
    alpha_list: tuple[float, ...] = (1.7,)
    gamma_list: tuple[float, ...] = (0.9,)
    N_list: tuple[int, ...] = (128, 256, 512)
    trajectories: int = 200
    l: int = 100
    J: int = 100
    fine_L: int = 14
    seed: int = 42
    T: float = 1.0
    output: str | None = None
    fmt: str = "csv"
    workers: int = 1

    def validate(self) -> None:
        if self.scheme not in SCHEME_TABLE:
            raise ConfigError(
                f"unknown scheme {self.scheme!r}; choose from {sorted(SCHEME_TABLE)}"
            )
        k, _ = SCHEME_TABLE[self.scheme]
        if not self.alpha_list or not self.gamma_list:
            raise ConfigError("alpha_list and gamma_list must be non-empty")
        for a in self.alpha_list:
            for g in self.gamma_list:
                try:
                    SchemeSpec.from_name(self.scheme, a, g)
                except ValueError as exc:
                    raise ConfigError(str(exc)) from None
        if not self.N_list:
            raise ConfigError("N_list must be non-empty")
        for prev, cur in zip(self.N_list, self.N_list[1:]):
            if cur != 2 * prev:
                raise ConfigError(
                    f"N_list must increase by factors of 2, got {prev} -> {cur}"
                )
        if self.N_list[0] % 2 or self.N_list[0] // 2 < k:
            raise ConfigError(
                f"smallest N={self.N_list[0]} must be even with N/2 >= k={k}"
            )
        fine = 2**self.fine_L
        for N in self.N_list:
            if fine % N:
                raise ConfigError(f"N={N} does not divide 2**fine_L={fine}")
        if self.trajectories < 1:
            raise ConfigError("trajectories must be >= 1")
        if self.l < 1 or self.J < self.l:
            raise ConfigError("need 1 <= l <= J (noise modes inside the resolved basis)")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 bits")
        if self.T <= 0:
            raise ConfigError("final time T must be positive")
        if self.fmt not in _FORMATS:
            raise ConfigError(f"format {self.fmt!r} not in {_FORMATS}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        tail = self._noise_spec().tail_estimate()
        if tail > _TRACE_TOL:
            raise ConfigError(
                f"noise amplitude tail {tail:.2e} beyond l={self.l} exceeds "
                f"{_TRACE_TOL:.0e}; raise l"
            )

    def _noise_spec(self) -> NoiseSpec:
        return NoiseSpec(l=self.l, fine_steps=2**self.fine_L, T=self.T, seed=self.seed)


@dataclass(frozen=True)
class CellResult:
    """Errors and observed rates of one (alpha, gamma) cell."""

    alpha: float
    gamma: float
    errors: tuple[float, ...]          # aligned with N_list; entry i couples (N_i/2, N_i)
    rates: tuple[float | None, ...]    # rates[0] is None


@dataclass(frozen=True)
class ConvergenceReport:
    scheme: str
    N_list: tuple[int, ...]
    cells: tuple[CellResult, ...]
    seed: int
    trajectories: int
    l: int
    J: int
    fine_L: int
    wall_time_s: float
    stability_warnings: tuple[str, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class TruncationRow:
    l: int
    error_sq: float       # Monte Carlo estimate of E ||u_l(T) - u_ref(T)||^2
    std_error: float


@dataclass(frozen=True)
class TruncationReport:
    scheme: str
    alpha: float
    gamma: float
    N: int
    l_ref: int
    rows: tuple[TruncationRow, ...]
    seed: int
    trajectories: int
    wall_time_s: float


@dataclass(frozen=True)
class DeterministicOrderResult:
    scheme: str
    alpha: float
    N_list: tuple[int, ...]
    errors: tuple[float, ...]
    rates: tuple[float, ...]
    oracle: float
    fitted_order: float


def _project_initial_data(J: int):
    v = project(initial_value_profile, J)
    b = project(initial_velocity_profile, J)
    return v, b


def _solve_grids(N_list: tuple[int, ...]) -> list[int]:
    return [N_list[0] // 2] + list(N_list)


def _sweep_chunk(cfg: ExperimentConfig, t0: int, t1: int) -> np.ndarray:
    """Per-trajectory squared pair differences for trajectories t0..t1-1.

    Returns shape (t1 - t0, n_cells, n_pairs); cells enumerate the cross
    product alpha_list x gamma_list in order.
    """
    k, m = SCHEME_TABLE[cfg.scheme]
    cells = [SchemeSpec.from_name(cfg.scheme, a, g)
             for a in cfg.alpha_list for g in cfg.gamma_list]
    solve_Ns = _solve_grids(cfg.N_list)
    v0, b0 = _project_initial_data(cfg.J)
    problems = {N: ProblemSpec(initial_value=v0, initial_velocity=b0,
                               J=cfg.J, T=cfg.T, N=N) for N in solve_Ns}
    nspec = cfg._noise_spec()
    pad = cfg.J - cfg.l
    out = np.empty((t1 - t0, len(cells), len(cfg.N_list)))
    for row, traj in enumerate(range(t0, t1)):
        folds = fold_trajectory(nspec, traj, m, k, solve_Ns)
        g = {N: (np.vstack([folds[N], np.zeros((pad, N + 1))]) if pad else folds[N])
             for N in solve_Ns}
        for ci, scheme in enumerate(cells):
            finals = {}
            for N in solve_Ns:
                V = step_all(scheme, problems[N], g[N])
                finals[N] = V[N]
            for pi, N in enumerate(cfg.N_list):
                d = finals[N] - finals[N // 2]
                out[row, ci, pi] = float(d @ d)
    return out


def _run_chunked(worker, cfg: ExperimentConfig, n_items: int, *args) -> np.ndarray:
    """Run ``worker`` over contiguous index ranges, reassembled in index order.

    The reassembled array is identical for any worker count, so downstream
    fixed-order reductions stay reproducible.
    """
    if cfg.workers == 1 or n_items <= 1:
        return worker(cfg, 0, n_items, *args)
    bounds = np.linspace(0, n_items, cfg.workers + 1).astype(int)
    spans = [(int(a), int(b)) for a, b in zip(bounds, bounds[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=len(spans)) as pool:
        futures = [pool.submit(worker, cfg, a, b, *args) for a, b in spans]
        parts = [f.result() for f in futures]
    return np.concatenate(parts, axis=0)


def run_sweep(cfg: ExperimentConfig) -> ConvergenceReport:
    """Monte Carlo rate sweep over the (alpha, gamma) cross product."""
    cfg.validate()
    start = time.perf_counter()
    sq = _run_chunked(_sweep_chunk, cfg, cfg.trajectories)
    mean_sq = sq.sum(axis=0) / cfg.trajectories
    errors = np.sqrt(mean_sq)  # (n_cells, n_pairs)

    cells = []
    warnings = []
    idx = 0
    for a in cfg.alpha_list:
        for g in cfg.gamma_list:
            errs = tuple(float(e) for e in errors[idx])
            rates: list[float | None] = [None]
            for i in range(1, len(errs)):
                rates.append(math.log2(errs[i - 1] / errs[i]))
            cells.append(CellResult(alpha=a, gamma=g, errors=errs, rates=tuple(rates)))
            spec = SchemeSpec.from_name(cfg.scheme, a, g)
            if spec.stability_warning:
                warnings.append(
                    f"{cfg.scheme} at alpha={a} is only conditionally stable"
                )
            idx += 1
    return ConvergenceReport(
        scheme=cfg.scheme, N_list=tuple(cfg.N_list), cells=tuple(cells),
        seed=cfg.seed, trajectories=cfg.trajectories, l=cfg.l, J=cfg.J,
        fine_L=cfg.fine_L, wall_time_s=time.perf_counter() - start,
        stability_warnings=tuple(warnings),
    )


def _fmt_num(x) -> str:
    return repr(float(x))


def _write_rows(path: str, fmt: str, header: list[str], rows: list[list]) -> None:
    if fmt not in _FORMATS:
        raise ConfigError(f"format {fmt!r} not in {_FORMATS}")
    with open(path, "w", newline="") as fh:
        if fmt == "json-lines":
            for row in rows:
                fh.write(json.dumps(dict(zip(header, row))) + "\n")
            return
        sep = "," if fmt == "csv" else "\t"
        fh.write(sep.join(header) + "\n")
        for row in rows:
            fh.write(sep.join("" if v is None else
                              (_fmt_num(v) if isinstance(v, float) else str(v))
                              for v in row) + "\n")


def emit_report(report: ConvergenceReport, path: str, fmt: str = "csv") -> None:
    """One row per (alpha, gamma, N); numeric columns round-trip exactly.

    Wall time is metadata only and never written, so identical configurations
    emit byte-identical files.
    """
    header = ["alpha", "gamma", "N", "error", "rate", "seed", "M"]
    rows = []
    for cell in report.cells:
        for i, N in enumerate(report.N_list):
            rate = cell.rates[i]
            rows.append([float(cell.alpha), float(cell.gamma), int(N),
                         float(cell.errors[i]),
                         None if rate is None else float(rate),
                         int(report.seed), int(report.trajectories)])
    _write_rows(path, fmt, header, rows)


def _truncation_chunk(cfg: ExperimentConfig, t0: int, t1: int,
                      l_list: tuple[int, ...]) -> np.ndarray:
    """Per-trajectory tail squared norms sum_{j>l} V_j(T)^2 for each l."""
    k, m = SCHEME_TABLE[cfg.scheme]
    scheme = SchemeSpec.from_name(cfg.scheme, cfg.alpha_list[0], cfg.gamma_list[0])
    l_ref = cfg.l
    N = cfg.N_list[0]
    zero = ModeField(coeffs=np.zeros(l_ref))
    problem = ProblemSpec(initial_value=zero, initial_velocity=zero,
                          J=l_ref, T=cfg.T, N=N)
    nspec = cfg._noise_spec()
    out = np.empty((t1 - t0, len(l_list)))
    for row, traj in enumerate(range(t0, t1)):
        g = fold_trajectory(nspec, traj, m, k, [N])[N]
        V_T = step_all(scheme, problem, g)[N]
        sq = V_T**2
        for li, l in enumerate(l_list):
            out[row, li] = float(sq[l:].sum())
    return out


def truncation_study(cfg: ExperimentConfig, l_list) -> TruncationReport:
    """Noise-truncation error E ||u_l(T) - u_{l_ref}(T)||^2 versus l.

    l_ref is cfg.l; the per-(seed, trajectory, mode) substreams make lower
    truncations nested restrictions of the reference paths, so the difference
    is exactly the tail-mode contribution.  Initial data cancels in the
    difference and is set to zero.  Runs at the coarsest N of the config.
    """
    cfg.validate()
    l_list = tuple(int(l) for l in l_list)
    if not l_list or min(l_list) < 1:
        raise ConfigError("l_list entries must be >= 1")
    if max(l_list) > cfg.l:
        raise ConfigError(f"l_list entries must be <= reference l={cfg.l}")
    start = time.perf_counter()
    M = cfg.trajectories
    tails = _run_chunked(_truncation_chunk, cfg, M, l_list)
    rows = []
    for li, l in enumerate(l_list):
        col = tails[:, li]
        mean = float(col.sum() / M)
        stderr = float(col.std(ddof=1) / math.sqrt(M)) if M > 1 else math.inf
        rows.append(TruncationRow(l=l, error_sq=mean, std_error=stderr))
    return TruncationReport(
        scheme=cfg.scheme, alpha=cfg.alpha_list[0], gamma=cfg.gamma_list[0],
        N=cfg.N_list[0], l_ref=cfg.l, rows=tuple(rows), seed=cfg.seed,
        trajectories=M, wall_time_s=time.perf_counter() - start,
    )


def emit_truncation(report: TruncationReport, path: str, fmt: str = "csv") -> None:
    header = ["l", "error_sq", "std_error", "l_ref", "seed", "M"]
    rows = [[int(r.l), float(r.error_sq), float(r.std_error),
             int(report.l_ref), int(report.seed), int(report.trajectories)]
            for r in report.rows]
    _write_rows(path, fmt, header, rows)


def deterministic_order_study(scheme_name: str, alpha: float, gamma: float = 0.5,
                              N_list=(64, 128, 256, 512),
                              T: float = 1.0) -> DeterministicOrderResult:
    """Zero-noise single-mode convergence against the Mittag-Leffler solution.

    Mode 1 with unit initial value and velocity: the exact terminal value is
    E_{a,1}(-lam T^a) + T E_{a,2}(-lam T^a), lam = pi^2.
    """
    scheme = SchemeSpec.from_name(scheme_name, alpha, gamma)
    lam = eigenvalue(1)
    z = -lam * T**alpha
    oracle = ml(alpha, 1.0, z) + T * ml(alpha, 2.0, z)
    one = ModeField(coeffs=np.ones(1))
    errors = []
    for N in N_list:
        problem = ProblemSpec(initial_value=one, initial_velocity=one, J=1, T=T, N=N)
        V = step_all(scheme, problem, np.zeros((1, N + 1)))
        u_T = float(V[N, 0]) + 1.0 + T
        errors.append(abs(u_T - oracle))
    rates = tuple(math.log2(errors[i - 1] / errors[i]) for i in range(1, len(errors)))
    logN = np.log2(np.asarray(N_list, dtype=float))
    fit = -float(np.polyfit(logN, np.log2(np.asarray(errors)), 1)[0])
    return DeterministicOrderResult(
        scheme=scheme.name, alpha=alpha, N_list=tuple(int(N) for N in N_list),
        errors=tuple(errors), rates=rates, oracle=oracle, fitted_order=fit,
    )

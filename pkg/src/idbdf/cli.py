"""Command-line interface: rate sweeps, truncation studies, and weight dumps.

Exit codes: 0 success, 2 invalid configuration or arguments, 3 runtime
resource failure.  A ``key = value`` config file may preset any sweep flag;
explicit flags win.  Environment variables are never consulted.
"""

from __future__ import annotations

import argparse
import sys

from .cq import frac_weights
from .experiment import (
    ConfigError,
    ExperimentConfig,
    deterministic_order_study,
    emit_report,
    emit_truncation,
    run_sweep,
    truncation_study,
)

PAPER_SCALE_TRAJECTORIES = 1000
PAPER_SCALE_FINE_L = 20

_CONFIG_KEYS = {
    "scheme": str, "alpha": str, "gamma": str, "N": str, "traj": int,
    "l": int, "J": int, "fine_L": int, "seed": int, "T": float,
    "out": str, "format": str, "workers": int,
}


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split(",") if tok)


def _parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.split(",") if tok)


def read_config_file(path: str) -> dict:
    """Parse a simple ``key = value`` file; '#' starts a comment."""
    values: dict = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[key] = _CONFIG_KEYS[key](val)
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {val!r}") from None
    return values


def _add_sweep_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file with preset flags")
    p.add_argument("--scheme", help="id1-bdf2, id2-bdf2, or id3-bdf3")
    p.add_argument("--alpha", help="comma list of fractional orders")
    p.add_argument("--gamma", help="comma list of noise integration orders")
    p.add_argument("--N", help="comma list of coarse step counts, doubling")
    p.add_argument("--traj", type=int, help="Monte Carlo trajectories")
    p.add_argument("--l", type=int, help="noise truncation level")
    p.add_argument("--J", type=int, help="solution mode count")
    p.add_argument("--fine-L", type=int, dest="fine_L",
                   help="log2 of the fine reference grid")
    p.add_argument("--seed", type=int, help="base seed")
    p.add_argument("--T", type=float, help="final time")
    p.add_argument("--out", help="output file path")
    p.add_argument("--format", dest="fmt", choices=("csv", "tsv", "json-lines"),
                   help="output format (default csv)")
    p.add_argument("--workers", type=int, help="trajectory worker processes")
    p.add_argument("--paper-scale", action="store_true",
                   help=f"use {PAPER_SCALE_TRAJECTORIES} trajectories and a "
                        f"2**{PAPER_SCALE_FINE_L} fine grid")


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    base = ExperimentConfig()
    values = {
        "scheme": base.scheme,
        "alpha": "1.7", "gamma": "0.9",
        "N": ",".join(str(n) for n in base.N_list),
        "traj": base.trajectories, "l": base.l, "J": base.J,
        "fine_L": base.fine_L, "seed": base.seed, "T": base.T,
        "out": base.output, "format": base.fmt, "workers": base.workers,
    }
    if args.config:
        values.update(read_config_file(args.config))
    if getattr(args, "paper_scale", False):
        values["traj"] = PAPER_SCALE_TRAJECTORIES
        values["fine_L"] = PAPER_SCALE_FINE_L
    for key, attr in (("scheme", "scheme"), ("alpha", "alpha"), ("gamma", "gamma"),
                      ("N", "N"), ("traj", "traj"), ("l", "l"), ("J", "J"),
                      ("fine_L", "fine_L"), ("seed", "seed"), ("T", "T"),
                      ("out", "out"), ("format", "fmt"), ("workers", "workers")):
        flag = getattr(args, attr, None)
        if flag is not None:
            values[key] = flag
    try:
        return ExperimentConfig(
            scheme=str(values["scheme"]).lower(),
            alpha_list=_parse_float_list(str(values["alpha"])),
            gamma_list=_parse_float_list(str(values["gamma"])),
            N_list=_parse_int_list(str(values["N"])),
            trajectories=int(values["traj"]),
            l=int(values["l"]), J=int(values["J"]),
            fine_L=int(values["fine_L"]), seed=int(values["seed"]),
            T=float(values["T"]), output=values["out"],
            fmt=str(values["format"]), workers=int(values["workers"]),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    cfg.validate()
    report = run_sweep(cfg)
    for note in report.stability_warnings:
        print(f"warning: {note}", file=sys.stderr)
    for cell in report.cells:
        for i, N in enumerate(report.N_list):
            rate = "" if cell.rates[i] is None else f"{cell.rates[i]:.4f}"
            print(f"alpha={cell.alpha} gamma={cell.gamma} N={N} "
                  f"error={cell.errors[i]:.6e} rate={rate}")
    if cfg.output:
        emit_report(report, cfg.output, cfg.fmt)
        print(f"wrote {cfg.output}")
    return 0


def _cmd_truncation(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    l_list = _parse_int_list(args.l_list)
    report = truncation_study(cfg, l_list)
    for row in report.rows:
        print(f"l={row.l} error_sq={row.error_sq:.6e} stderr={row.std_error:.2e}")
    if cfg.output:
        emit_truncation(report, cfg.output, cfg.fmt)
        print(f"wrote {cfg.output}")
    return 0


def _cmd_deterministic(args: argparse.Namespace) -> int:
    N_list = _parse_int_list(args.N) if args.N else (64, 128, 256, 512)
    gamma = args.gamma_value
    for alpha in _parse_float_list(args.alpha or "1.3,1.7"):
        res = deterministic_order_study(args.scheme or "id2-bdf2", alpha,
                                        gamma=gamma, N_list=N_list)
        errs = " ".join(f"{e:.3e}" for e in res.errors)
        rates = " ".join(f"{r:.3f}" for r in res.rates)
        print(f"{res.scheme} alpha={alpha}: oracle={res.oracle:.12f} "
              f"errors=[{errs}] rates=[{rates}] fit={res.fitted_order:.3f}")
    return 0


def _cmd_weights_dump(args: argparse.Namespace) -> int:
    table = frac_weights(args.k, args.beta, args.n)
    lines = [f"{j},{w!r}" for j, w in enumerate(table.w)]
    text = "j,w\n" + "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="idbdf",
        description="ID-BDF convolution-quadrature experiments for stochastic "
                    "fractional evolution equations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="Monte Carlo convergence-rate sweep")
    _add_sweep_flags(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("truncation", help="noise truncation error versus level l")
    _add_sweep_flags(p)
    p.add_argument("--l-list", dest="l_list", default="5,10,20,40",
                   help="comma list of truncation levels (reference is --l)")
    p.set_defaults(func=_cmd_truncation)

    p = sub.add_parser("deterministic-order",
                       help="zero-noise order check against the closed-form solution")
    p.add_argument("--scheme", default="id2-bdf2")
    p.add_argument("--alpha", help="comma list of fractional orders")
    p.add_argument("--gamma", type=float, dest="gamma_value", default=0.5,
                   help="noise order (scheme parameter only; noise is off)")
    p.add_argument("--N", help="comma list of step counts")
    p.set_defaults(func=_cmd_deterministic)

    p = sub.add_parser("weights-dump", help="print or save one weight table")
    p.add_argument("--k", type=int, required=True, choices=(1, 2, 3))
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_weights_dump)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (MemoryError, OSError) as exc:
        print(f"resource failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())

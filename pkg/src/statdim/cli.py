"""Command line interface.

Subcommands (all driven by an INI config, see :mod:`statdim.harness`):

* ``bounds``      print the measurement-bound table (m_hat, width, raw_m)
* ``weights``     print the optimal per-part weights as CSV
* ``phase-grid``  run the (s, m) success-probability grid, write CSV
* ``compare``     run unit-vs-weighted curves, write one CSV per curve
* ``mc-check``    validate the closed-form expectations against Monte Carlo

Common flags: ``--config PATH`` (required), ``--seed U64``, ``--trials N``,
``--out PATH``, ``--threads N``, ``--weights {unit,optimal,per-trial}``.
Flags override the corresponding config keys.  For ``mc-check``,
``--trials`` sets the Monte Carlo sample count per setting.

Exit status: 0 on success, 1 on a failed check or runtime error, 2 on a
configuration problem (message names the offending key).
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from . import bounds as bounds_mod
from . import harness
from .errors import ConfigError, StatdimError
from .harness import ExperimentConfig, run_phase_grid, run_weight_comparison, write_csv
from .mc import mean_dist_sq

__all__ = ["main"]


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.config is None:
        raise ConfigError("missing required flag --config")
    cfg = ExperimentConfig.from_file(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["base_seed"] = args.seed
    if args.trials is not None and args.command != "mc-check":
        overrides["trials"] = args.trials
    if args.out is not None:
        overrides["out"] = args.out
    if args.weights is not None:
        overrides["weights_mode"] = args.weights
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def _s_values(cfg: ExperimentConfig) -> list[int]:
    if cfg.s_grid is not None:
        return list(cfg.s_grid)
    return [cfg.nominal_support()]


def _emit(text: str, out: str | None) -> None:
    print(text, end="" if text.endswith("\n") else "\n")
    if out is not None:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text if text.endswith("\n") else text + "\n")


def _cmd_bounds(cfg: ExperimentConfig, args: argparse.Namespace) -> int:
    label = "unit" if cfg.weights_mode == "unit" else "optimal"
    lines = ["family,s,weights,m_hat,width,theory_m,raw_m"]
    for s in _s_values(cfg):
        report = harness._theory(cfg, s, label)
        lines.append(
            f"{cfg.family},{s},{label},{report.m_hat:.6f},"
            f"{report.sandwich_width:.6f},{report.theory_m:.6f},{report.raw_m()}"
        )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_weights(cfg: ExperimentConfig, args: argparse.Namespace) -> int:
    if cfg.sizes is None:
        raise ConfigError("missing section [partition] (weights needs it)")
    s = cfg.nominal_support()
    omega = harness._nominal_omega(cfg, s)
    if cfg.family == "tv" or cfg.shuffle:
        part = harness._nominal_instance(cfg, s).part
    else:
        part = cfg.partition()
    lines = ["part,size,alpha,omega"]
    for i in range(part.num_parts):
        lines.append(
            f"{i},{int(part.sizes[i])},{part.alpha[i]:.6f},{omega[i]:.6f}"
        )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_phase_grid(cfg: ExperimentConfig, args: argparse.Namespace) -> int:
    result = run_phase_grid(cfg, threads=args.threads)
    if cfg.out is None:
        raise ConfigError("missing key 'out' in section [experiment] (or pass --out)")
    path = write_csv(result, cfg.out)
    print(result.summary())
    print(f"wrote {path}")
    return 0


def _cmd_compare(cfg: ExperimentConfig, args: argparse.Namespace) -> int:
    result = run_weight_comparison(cfg, threads=args.threads)
    if cfg.out is None:
        raise ConfigError("missing key 'out' in section [experiment] (or pass --out)")
    stem = Path(cfg.out)
    suffix = stem.suffix or ".csv"
    for label in result.labels:
        tag = label.replace("-", "_")
        path = write_csv(result.filter(label), stem.with_name(f"{stem.stem}_{tag}{suffix}"))
        print(f"wrote {path}")
    print(result.summary())
    return 0


def _cmd_mc_check(cfg: ExperimentConfig, args: argparse.Namespace) -> int:
    samples = args.trials if args.trials is not None else 20_000
    s = _s_values(cfg)[-1]
    instance = harness._nominal_instance(cfg, s)
    part = instance.part
    rng = np.random.default_rng(harness._derived_seed(cfg.base_seed, "mc-check"))
    print("family,t,psi,mc_mean,mc_stderr,z")
    worst = 0.0
    for i in range(5):
        t = float(rng.uniform(0.3, 2.5))
        omega = rng.uniform(0.3, 1.0, part.num_parts)
        if cfg.family == "entrywise":
            psi = bounds_mod.psi_entrywise(t, part, omega)
        elif cfg.family == "block":
            psi = bounds_mod.psi_block(t, part, instance.block.k, omega)
        else:
            psi = bounds_mod.psi_tv(t, instance.profile, part, omega)
        est = mean_dist_sq(
            instance, t, omega, samples=samples,
            seed=harness._derived_seed(cfg.base_seed, "mc-check", i),
        )
        z = (est.mean - psi) / est.std_error
        worst = max(worst, abs(z))
        print(f"{cfg.family},{t:.4f},{psi:.6f},{est.mean:.6f},{est.std_error:.6f},{z:+.2f}")
    if worst > 4.0:
        print(f"FAIL: worst |z| = {worst:.2f} exceeds 4", file=sys.stderr)
        return 1
    print(f"OK: worst |z| = {worst:.2f} over 5 settings x {samples} samples")
    return 0


_COMMANDS = {
    "bounds": _cmd_bounds,
    "weights": _cmd_weights,
    "phase-grid": _cmd_phase_grid,
    "compare": _cmd_compare,
    "mc-check": _cmd_mc_check,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="statdim",
        description="Measurement bounds, optimal weights, and phase-transition "
        "experiments for weighted recovery programs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("bounds", "print the measurement-bound table for the config"),
        ("weights", "print the optimal per-part weights as CSV"),
        ("phase-grid", "run the (s, m) phase grid and write CSV"),
        ("compare", "run unit vs weighted curves and write CSVs"),
        ("mc-check", "validate closed-form expectations by Monte Carlo"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="path to the INI experiment config")
        p.add_argument("--seed", type=int, help="override base_seed")
        p.add_argument(
            "--trials", type=int,
            help="override trials (mc-check: Monte Carlo sample count)",
        )
        p.add_argument("--out", help="override the output path")
        p.add_argument("--threads", type=int, default=1, help="worker processes")
        p.add_argument(
            "--weights", choices=["unit", "optimal", "per-trial"],
            help="override the weight mode",
        )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except StatdimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

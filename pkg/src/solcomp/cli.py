"""``solcomp evolve|theorem|minimize|axioms --config FILE [--seed S] [--jobs J] [--out DIR]``.

Exit codes: 0 success, 1 runtime failure, 2 configuration or validation failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .macrostate import AdmissibilityError

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="solcomp", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=("evolve", "theorem", "minimize", "axioms"))
    ap.add_argument("--config", required=True, help="TOML experiment file")
    ap.add_argument("--seed", type=int, help="override the config seed")
    ap.add_argument("--jobs", type=int, default=1, help="worker processes for ensembles")
    ap.add_argument("--out", help="override the output directory")
    ap.add_argument("--ensemble-size", type=int, help="override [theorem] ensemble_size")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    # imported late so `solcomp --help` stays fast
    from . import experiments

    stage = "config"
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError(f"seed must be a 64-bit non-negative integer, got {args.seed}")
            cfg = dataclasses.replace(cfg, seed=args.seed)
        if args.out is not None:
            cfg = dataclasses.replace(cfg, output_dir=Path(args.out))
        if args.ensemble_size is not None:
            if args.ensemble_size < 0:
                raise ConfigError("ensemble size must be non-negative")
            cfg = dataclasses.replace(
                cfg, theorem=dataclasses.replace(cfg.theorem, ensemble_size=args.ensemble_size)
            )
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        out = cfg.output_dir
        out.mkdir(parents=True, exist_ok=True)
        stage = args.command
        if args.command == "evolve":
            rows = experiments.run_evolve(cfg, out)
            print(f"evolve: {len(rows)} samples -> {out / 'complexity_series.csv'}")
        elif args.command == "theorem":
            s = experiments.run_theorem(cfg, out, jobs=args.jobs)
            rate = "n/a" if s["pass_rate"] is None else f"{s['pass_rate']:.3f}"
            print(f"theorem: {s['passed']}/{s['ensemble_size']} chains passed (rate {rate})")
            for st, k in sorted(s["failures_by_stage"].items()):
                print(f"  failed at {st}: {k}")
        elif args.command == "minimize":
            gs = experiments.run_minimize(cfg, out)
            print(f"minimize: J = {gs.J_value!r}, omega = {gs.lagrange_omega!r}, "
                  f"residual = {gs.residual:.3g}")
        else:
            rep, rows = experiments.run_axioms(cfg, out)
            for r in rows:
                print(f"{r[0]}: violations={r[1]} over {r[2]} (constant {r[3]:.6g})")
    except (ConfigError, AdmissibilityError) as exc:
        print(f"solcomp {stage}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - reported with the stage that failed
        print(f"solcomp {stage}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands:
  compare   run the selected methods at a fixed configuration
  sweep     run a parameter sweep (p, C, targets, rho2, sigma1_2)
  mc-eval   recovery-error evaluation via the completion pipeline
  mask-gap  spectral gap of the generated sampling mask

Exit codes: 0 success, 1 validation error, 2 solver infeasibility on all rows.
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, ScenarioConfig, load_config
from .harness import (
    ExperimentSpec,
    SpecError,
    format_csv,
    run_compare,
    sweep as run_sweep,
    write_csv,
)
from .samplingopt import spectral_gap
from .scenario import ScenarioError, generate_sampling_mask
from .streams import stream


def _parse_sweep(text):
    """var=start:stop:step -> (var, [values])."""
    var, _, grid = text.partition("=")
    parts = grid.split(":")
    if len(parts) != 3:
        raise SpecError(f"bad sweep spec {text!r}; expected var=start:stop:step")
    start, stop, step = (float(s) for s in parts)
    if step <= 0:
        raise SpecError("sweep step must be positive")
    values = []
    v = start
    while v <= stop + 1e-12:
        values.append(round(v, 12))
        v += step
    return var, values


def _add_common(p):
    p.add_argument("--config", help="scenario config file (flat key = value)")
    p.add_argument("--seed", type=int, default=0, help="base seed")
    p.add_argument("--seeds", type=int, default=1, help="number of consecutive seeds")
    p.add_argument("--methods", default="selfish,noncoop", help="comma-separated methods")
    p.add_argument("--out", help="output CSV path (default: stdout)")
    p.add_argument("--mc-trials", type=int, default=0, dest="mc_trials")
    p.add_argument("--timing", action="store_true", help="emit real wall times")


def _build_spec(args, sweep_var="none", sweep_values=(None,)):
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    return ExperimentSpec(
        cfg=cfg,
        methods=[m.strip() for m in args.methods.split(",") if m.strip()],
        sweep_var=sweep_var,
        sweep_values=list(sweep_values),
        seeds=list(range(args.seed, args.seed + args.seeds)),
        mc_trials=args.mc_trials,
    )


def _emit(rows, args):
    text = format_csv(rows, timing=args.timing)
    if args.out:
        write_csv(rows, args.out, timing=args.timing)
    else:
        sys.stdout.write(text)
    if rows and all(r.error for r in rows):
        return 2
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="specshare", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_cmp = sub.add_parser("compare", help="run methods at a fixed configuration")
    _add_common(p_cmp)

    p_swp = sub.add_parser("sweep", help="run a parameter sweep")
    _add_common(p_swp)
    p_swp.add_argument("--sweep", required=True, help="var=start:stop:step")

    p_mc = sub.add_parser("mc-eval", help="matrix-completion recovery evaluation")
    _add_common(p_mc)

    p_gap = sub.add_parser("mask-gap", help="spectral gap of the sampling mask")
    p_gap.add_argument("--config", help="scenario config file")
    p_gap.add_argument("--seed", type=int, default=0)

    args = parser.parse_args(argv)
    try:
        if args.command == "compare":
            return _emit(run_compare(_build_spec(args)), args)
        if args.command == "sweep":
            var, values = _parse_sweep(args.sweep)
            return _emit(run_sweep(_build_spec(args, var, values)), args)
        if args.command == "mc-eval":
            spec = _build_spec(args)
            if spec.mc_trials < 1:
                spec.mc_trials = 10
            return _emit(run_compare(spec), args)
        if args.command == "mask-gap":
            cfg = load_config(args.config) if args.config else ScenarioConfig()
            cfg = cfg.replace(seed=args.seed)
            mask = generate_sampling_mask(cfg, stream(cfg.seed, "mask"))
            s1, s2, gap = spectral_gap(mask)
            print(f"sigma1={s1:.9g} sigma2={s2:.9g} gap={gap:.9g}")
            return 0
    except (ConfigError, SpecError, ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 1


if __name__ == "__main__":
    sys.exit(main())

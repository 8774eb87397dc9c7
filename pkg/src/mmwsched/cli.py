"""Command-line entry points: run, sweep, oracle-check, patterns."""

import argparse
import os
import sys

from .beams import design_codebook, export_patterns
from .config import ConfigError, PROFILES, load_config
from .scheduler import CapExceededError
from .harness import (AGGREGATE_COLUMNS, REALIZATION_COLUMNS, CampaignSpec,
                      aggregate_point, parse_campaign_text, run_campaign,
                      run_point, sandwich_check, write_csv)


def _add_config_flags(parser):
    parser.add_argument("--config", help="config file path (default: $MMWSCHED_CONFIG or profile)")
    parser.add_argument("--profile", choices=PROFILES, default=None,
                        help="shipped config profile (default table1)")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override a config key (repeatable)")


def _parse_overrides(pairs):
    overrides = {}
    for pair in pairs:
        if "=" not in pair:
            raise SystemExit(f"--set expects KEY=VALUE, got {pair!r}")
        key, value = pair.split("=", 1)
        overrides[key.strip()] = value.strip()
    return overrides


def _load(args):
    return load_config(path=args.config, profile=args.profile,
                       overrides=_parse_overrides(args.overrides))


def cmd_run(args) -> int:
    cfg = _load(args)
    if args.dump_solutions:
        os.makedirs(args.dump_solutions, exist_ok=True)
        from .harness import run_realization
        from .rng import derive_seed
        results = [run_realization(cfg, derive_seed(args.seed, i),
                                   dump_dir=args.dump_solutions)
                   for i in range(args.realizations)]
    else:
        results = run_point(cfg, args.realizations, args.seed, workers=args.workers)
    row = aggregate_point(cfg, results, args.realizations, args.seed)
    write_csv(args.output, AGGREGATE_COLUMNS, [row])
    if args.per_realization:
        spec = CampaignSpec(cfg, {}, args.realizations, args.seed)
        _, per_rows = run_campaign(spec, workers=args.workers)
        write_csv(args.per_realization, REALIZATION_COLUMNS, per_rows)
    print(f"gm_bar={row['gm_bar']:.6g} gmr_bar={row['gmr_bar']:.6g} "
          f"gap={row['gap_pct']:.3f}% -> {args.output}")
    return 0


def cmd_sweep(args) -> int:
    with open(args.campaign, "r", encoding="utf-8") as fh:
        spec = parse_campaign_text(fh.read(), source=args.campaign)
    if args.seed is not None:
        spec.master_seed = args.seed
    progress = (lambda msg: print(msg, file=sys.stderr)) if args.verbose else None
    agg, per = run_campaign(spec, workers=args.workers, progress=progress)
    write_csv(args.output, AGGREGATE_COLUMNS, agg)
    if args.per_realization:
        write_csv(args.per_realization, REALIZATION_COLUMNS, per)
    failures = [row for row in agg if row["status"] != "ok"]
    print(f"{len(agg)} sweep points ({len(failures)} failed) -> {args.output}")
    return 1 if failures else 0


def cmd_oracle_check(args) -> int:
    cfg = _load(args)
    records = sandwich_check(cfg, args.instances, args.seed)
    bad = 0
    for rec in records:
        ok = rec["left_ok"] and rec["right_ok"]
        bad += not ok
        print(f"instance {rec['instance']:3d}: feasible={rec['feasible']:.9f} "
              f"oracle={rec['oracle']:.9f} relaxed={rec['relaxed']:.9f} "
              f"{'ok' if ok else 'VIOLATION'}")
    print(f"{len(records) - bad}/{len(records)} instances satisfy the sandwich")
    return 1 if bad else 0


def cmd_patterns(args) -> int:
    codebook = design_codebook(args.antennas, args.bits, args.rf_per_stream)
    export_patterns(codebook, args.output)
    print(f"{codebook.n_beams} beam patterns -> {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmwsched",
                                     description="mmWave multi-user scheduling simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single sweep point at one config")
    _add_config_flags(p_run)
    p_run.add_argument("--seed", type=int, default=0, help="campaign master seed")
    p_run.add_argument("--realizations", type=int, default=1)
    p_run.add_argument("--workers", type=int, default=1)
    p_run.add_argument("--output", default="run.csv")
    p_run.add_argument("--per-realization", default=None,
                       help="also write per-realization rows to this CSV")
    p_run.add_argument("--dump-solutions", default=None, metavar="DIR",
                       help="write one per-MB solution CSV per MB into DIR")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="campaign over a sweep grid")
    p_sweep.add_argument("campaign", help="campaign spec file")
    p_sweep.add_argument("--seed", type=int, default=None, help="override master seed")
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.add_argument("--output", default="sweep.csv")
    p_sweep.add_argument("--per-realization", default=None)
    p_sweep.add_argument("--verbose", action="store_true")
    p_sweep.set_defaults(func=cmd_sweep)

    p_oracle = sub.add_parser("oracle-check", help="tiny-instance sandwich test")
    _add_config_flags(p_oracle)
    p_oracle.add_argument("--instances", type=int, default=50)
    p_oracle.add_argument("--seed", type=int, default=0)
    p_oracle.set_defaults(func=cmd_oracle_check)

    p_pat = sub.add_parser("patterns", help="export beam patterns as CSV")
    p_pat.add_argument("--antennas", type=int, required=True)
    p_pat.add_argument("--bits", type=int, required=True)
    p_pat.add_argument("--rf-per-stream", type=int, default=1)
    p_pat.add_argument("--output", default="patterns.csv")
    p_pat.set_defaults(func=cmd_patterns)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, CapExceededError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

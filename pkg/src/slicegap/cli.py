"""Command-line entry point.

Subcommands:
  iat-sweep    — dimension sweep of radius-trace IATs, CSV output
  gap-table    — spectral-gap certificates per (target, sampler, d), JSON
  check-lambda — level-set class membership reports, JSON
  verify       — stationarity / kernel / adjointness / equivalence checks
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import SliceGapError
from .harness import ExperimentConfig, check_lambda, gap_table, iat_sweep, \
    verify, write_iat_csv


def _build_config(args) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.from_json(args.config)
    else:
        cfg = ExperimentConfig()
    if args.paper_scale:
        overrides = {k: v for k, v in cfg.to_dict().items()
                     if k not in ("dims", "n_it", "n_rep")}
        cfg = ExperimentConfig.paper_scale(**overrides)
    if args.seed is not None:
        cfg.base_seed = args.seed
    if args.grid_size is not None:
        cfg.grid_size = args.grid_size
    if args.out is not None:
        cfg.out = args.out
    return cfg


def _emit_json(payload, out_path):
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out_path:
        with open(out_path, "w") as f:
            f.write(text + "\n")
    else:
        print(text)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="slicegap",
        description="Slice-sampling spectral-gap laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("iat-sweep", "gap-table", "check-lambda", "verify"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="path to a JSON config file")
        p.add_argument("--seed", type=int, help="base seed override")
        p.add_argument("--out", help="output file path")
        p.add_argument("--paper-scale", action="store_true",
                       help="full-size sweep (d up to 100, n_it=1e5, n_rep=10)")
        p.add_argument("--grid-size", type=int, help="kernel grid size override")
        p.add_argument("--workers", type=int, default=None,
                       help="process-pool size for the sweep")
    args = parser.parse_args(argv)

    try:
        cfg = _build_config(args)
        if args.command == "iat-sweep":
            result = iat_sweep(cfg, max_workers=args.workers)
            if cfg.out:
                write_iat_csv(result, cfg.out)
                print(f"wrote {cfg.out}")
            else:
                _emit_json(result, None)
            return 0
        if args.command == "gap-table":
            _emit_json(gap_table(cfg), cfg.out)
            return 0
        if args.command == "check-lambda":
            _emit_json(check_lambda(cfg), cfg.out)
            return 0
        if args.command == "verify":
            report = verify(cfg)
            _emit_json(report, cfg.out)
            return 0 if report["status"] == "pass" else 1
    except SliceGapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: run / validate / sweep."""

import argparse
import sys

from .harness import ExperimentConfig, parse_config_text, run, validate_config


def _load(path: str, overrides) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        mapping = parse_config_text(fh.read())
    for item in overrides or []:
        if "=" not in item:
            raise SystemExit(f"override must be key=value, got {item!r}")
        key, value = item.split("=", 1)
        mapping[key.strip()] = value.strip()
    return ExperimentConfig.from_mapping(mapping)


def _apply_flags(cfg: ExperimentConfig, args) -> ExperimentConfig:
    from dataclasses import replace
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.workers is not None:
        updates["workers"] = args.workers
    if args.out is not None:
        updates["out_path"] = args.out
    return replace(cfg, **updates) if updates else cfg


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dqlcsim",
        description="Simulate quantizer-linear multiple-access transmission sweeps")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    p_val = sub.add_parser("validate", help="check a config without running")
    p_val.add_argument("config")
    p_sweep = sub.add_parser("sweep", help="run with key=value overrides")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--override", action="append", default=[],
                         metavar="KEY=VALUE")
    for p in (p_run, p_sweep):
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--out", default=None)

    args = parser.parse_args(argv)
    try:
        overrides = getattr(args, "override", None)
        cfg = _load(args.config, overrides)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    if args.command == "validate":
        errors = validate_config(cfg)
        if errors:
            for e in errors:
                print(f"error: {e}", file=sys.stderr)
            return 1
        print("ok")
        return 0

    cfg = _apply_flags(cfg, args)
    errors = validate_config(cfg)
    if errors:
        for e in errors:
            print(f"error: {e}", file=sys.stderr)
        return 1
    run(cfg)
    print(f"wrote {cfg.out_path}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())

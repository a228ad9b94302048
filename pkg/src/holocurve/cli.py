"""Command line: ``holocurve run|check|list-kinds``."""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

from holocurve.config import KINDS, ConfigError, parse_config
from holocurve.runner import PASS, run_batch

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
SUITES = ("acceptance",)


def suite_paths(name: str) -> list[Path]:
    root = resources.files("holocurve") / "suites" / name
    return sorted(Path(str(p)) for p in root.iterdir() if p.name.endswith(".cfg"))


def _load(paths):
    configs, errors = [], []
    for path in paths:
        try:
            configs.append(parse_config(path))
        except ConfigError as err:
            errors.append(str(err))
        except OSError as err:
            errors.append(f"{path}: {err.strerror or err}")
    seen = {}
    for cfg in configs:
        if cfg.name in seen:
            errors.append(f"{cfg.path}: experiment name {cfg.name!r} already used by {seen[cfg.name]}")
        seen.setdefault(cfg.name, cfg.path)
    return configs, errors


def cmd_run(args) -> int:
    paths = list(args.configs)
    if args.suite:
        paths += suite_paths(args.suite)
    if not paths:
        print("run: no configurations given", file=sys.stderr)
        return EXIT_CONFIG
    configs, errors = _load(paths)
    if errors:
        for e in errors:
            print(e, file=sys.stderr)
        return EXIT_CONFIG
    reports = run_batch(configs, args.out, args.seed, max(1, args.jobs))
    width = max(len(r.name) for r in reports)
    for r in reports:
        line = f"{r.status.upper():<12} {r.name:<{width}}  {r.kind}"
        print(line + (f"  {r.error}" if r.error else ""))
    passed = sum(r.status == PASS for r in reports)
    print(f"{passed}/{len(reports)} passed; reports in {args.out}")
    return EXIT_PASS if passed == len(reports) else EXIT_FAIL


def cmd_check(args) -> int:
    configs, errors = _load(args.configs)
    for e in errors:
        print(e, file=sys.stderr)
    for cfg in configs:
        print(f"{cfg.path}: ok ({cfg.kind})")
    return EXIT_CONFIG if errors else EXIT_PASS


def cmd_list_kinds(args) -> int:
    width = max(map(len, KINDS))
    for kind, text in KINDS.items():
        print(f"{kind:<{width}}  {text}")
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="holocurve", description="Value-distribution experiments for holomorphic curves.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run experiments and write reports")
    run.add_argument("configs", nargs="*", help="experiment configuration files")
    run.add_argument("--out", default="results", help="output directory (default: results)")
    run.add_argument("--suite", choices=SUITES, help="add a shipped suite of configurations")
    run.add_argument("--seed", type=int, default=None, help="seed for configs without [samples] seed (default 0)")
    run.add_argument("--jobs", type=int, default=1, help="experiments to run concurrently")
    run.set_defaults(func=cmd_run)

    check = sub.add_parser("check", help="validate configurations without running them")
    check.add_argument("configs", nargs="+")
    check.set_defaults(func=cmd_check)

    kinds = sub.add_parser("list-kinds", help="list experiment kinds")
    kinds.set_defaults(func=cmd_list_kinds)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

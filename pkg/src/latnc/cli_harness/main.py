"""``latnc`` command line.

    latnc run --config exp.json [--out results.csv] [--format csv|json] [--threads N] [--seed S]
    latnc run --preset ldlc_rate_diverse
    latnc presets list
    latnc presets show NAME

Exit status: 0 on success, 2 for a malformed or invalid config, 1 for any
failure while running.
"""
from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from importlib import resources

from ..errors import LatncError, ParseError, ValidationError
from .config import parse_config
from .experiments import run_experiment
from .results import write_results

THREADS_ENV = "LATNC_THREADS"


def preset_names() -> list[str]:
    root = resources.files(__package__) / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def preset_text(name: str) -> str:
    path = resources.files(__package__) / "presets" / f"{name}.json"
    if not path.is_file():
        raise ValidationError("preset", f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return path.read_text(encoding="utf-8")


def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="latnc", description="Rate-diverse network coding experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment config")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="path to a JSON config, or - for stdin")
    src.add_argument("--preset", help="name of a bundled config")
    run.add_argument("--out", default="-", help="output file (default: stdout)")
    run.add_argument("--format", choices=("csv", "json"), default="csv")
    run.add_argument("--threads", type=int, default=None, help=f"worker threads (default: ${THREADS_ENV} or 1)")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    run.add_argument("--trials", type=int, default=None, help="override the config trial budget")

    presets = sub.add_parser("presets", help="list or print bundled configs")
    psub = presets.add_subparsers(dest="action", required=True)
    psub.add_parser("list")
    show = psub.add_parser("show")
    show.add_argument("name")
    return parser


def _load_config(args):
    if args.preset:
        text = preset_text(args.preset)
    elif args.config == "-":
        text = sys.stdin.read()
    else:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    cfg = parse_config(text)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        if args.trials < 1:
            raise ValidationError("trials", "must be >= 1")
        overrides["trials"] = args.trials
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "presets":
        try:
            if args.action == "list":
                print("\n".join(preset_names()))
            else:
                sys.stdout.write(preset_text(args.name))
        except ValidationError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        return 0

    try:
        cfg = _load_config(args)
    except (ParseError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2

    threads = args.threads if args.threads is not None else _default_threads()
    try:
        rows = run_experiment(cfg, threads=max(1, threads))
        write_results(rows, args.out, args.format)
    except (LatncError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

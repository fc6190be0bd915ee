"""Command-line front end.

Subcommands: decay, dde-compare, rabi, pi-pulse, pulse-train, sweep, regress.
Exit codes: 0 success, 1 configuration error, 2 physics-domain error,
3 regression failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .config import ScenarioConfig
from .exceptions import ConfigError, PhysicsError
from .regression import run_all
from .runner import run

_SCENARIO_COMMANDS = {
    "decay": ("decay",),
    "dde-compare": ("dde-compare",),
    "rabi": ("rabi",),
    "pi-pulse": ("pi-pulse",),
    "pulse-train": ("pulse-train",),
    "sweep": ("detuning-sweep", "position-sweep"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # map usage errors onto exit code 1
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="jqfsim",
                     description="Waveguide-QED simulator for a data qubit "
                                 "protected by a Josephson quantum filter")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--config", help="JSON scenario configuration")
        sp.add_argument("--out", help="output table path (overrides config)")
        sp.add_argument("--format", choices=("csv", "json"),
                        help="table format (overrides config)")
        sp.add_argument("--jobs", type=int, default=None,
                        help="sweep parallelism (default: machine)")
        sp.add_argument("--no-jqf", action="store_true",
                        help="set gamma2 = 0 (filter-free baseline)")
        sp.add_argument("--report", help="write the JSON run report here")

    for cmd in _SCENARIO_COMMANDS:
        sp = sub.add_parser(cmd, help=f"run the {cmd} scenario")
        add_common(sp)

    sp = sub.add_parser("regress", help="run the acceptance regression suite")
    sp.add_argument("--only", type=int, action="append",
                    help="run only this criterion (repeatable, 1-9)")
    sp.add_argument("--report", help="write the JSON regression report here")
    return parser


def _run_scenario(args) -> int:
    kinds = _SCENARIO_COMMANDS[args.command]
    if args.config:
        cfg = ScenarioConfig.from_file(
            args.config, kind=kinds[0] if len(kinds) == 1 else None)
        if cfg.kind not in kinds:
            raise ConfigError(
                f"scenario kind {cfg.kind!r} is not valid for the "
                f"{args.command!r} subcommand (expected one of {list(kinds)})")
    else:
        cfg = ScenarioConfig.from_dict({}, kind=kinds[0])
    updates = {}
    if args.out:
        updates["output_path"] = args.out
    if args.format:
        updates["output_format"] = args.format
    if args.jobs is not None:
        updates["jobs"] = args.jobs
    if args.no_jqf:
        updates["no_jqf"] = True
    if not (cfg.output_path or args.out):
        updates["output_path"] = f"{args.command}.{args.format or cfg.output_format}"
    if updates:
        cfg = dataclasses.replace(cfg, **updates)
    report = run(cfg)
    text = report.to_json()
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def _run_regress(args) -> int:
    results = run_all(only=args.only)
    for result in results:
        print(result.line)
    if args.report:
        payload = [
            {"index": r.index, "name": r.name, "passed": r.passed,
             "detail": r.detail, "seconds": r.seconds,
             "values": {k: v for k, v in r.values.items()
                        if isinstance(v, (int, float, bool))}}
            for r in results
        ]
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    failed = [r for r in results if not r.passed]
    if failed:
        print(f"{len(failed)} of {len(results)} criteria FAILED", file=sys.stderr)
        return 3
    print(f"all {len(results)} criteria passed")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "regress":
            return _run_regress(args)
        return _run_scenario(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except PhysicsError as exc:
        print(f"physics-domain error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

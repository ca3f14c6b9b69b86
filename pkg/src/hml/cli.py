"""Command-line front end: run experiments, list them, verify atom files.

Exit status: 0 when the requested run (or atom verification) passed, 1 when
it executed but failed its checks, 2 for usage and configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .atoms import atom_from_json, verify_atom
from .experiments import (
    ConfigError,
    _jsonable,
    default_config,
    describe,
    list_experiments,
    run,
)

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hml",
        description="Morrey / local Hardy-Morrey numerical experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser(
        "run",
        help="run an experiment from a JSON config file or by name with defaults",
    )
    p_run.add_argument(
        "config",
        help="path to a JSON config file, or an experiment name for its defaults",
    )
    p_run.add_argument(
        "--output-dir",
        default=None,
        help="override the configured output directory",
    )

    sub.add_parser("list", help="list the available experiments")

    p_desc = sub.add_parser("describe", help="describe one experiment")
    p_desc.add_argument("name", help="experiment name")

    p_ver = sub.add_parser("verify-atom", help="check a serialized atom file")
    p_ver.add_argument("file", help="path to an atom JSON file")
    return parser


def _load_config(arg: str) -> dict:
    path = Path(arg)
    if path.is_file():
        try:
            with open(path) as fh:
                cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"(root): {path} is not valid JSON: {exc}"])
        if not isinstance(cfg, dict):
            raise ConfigError([f"(root): {path} must contain a JSON object"])
        return cfg
    if arg in list_experiments():
        return default_config(arg)
    raise ConfigError(
        [f"config: {arg!r} is neither a config file nor a known experiment name"]
    )


def _cmd_run(args) -> int:
    try:
        cfg = _load_config(args.config)
        bundle = run(cfg, output_dir=args.output_dir)
    except ConfigError as exc:
        for msg in exc.errors:
            print(f"config error: {msg}", file=sys.stderr)
        return 2
    print(f"experiment: {bundle.summary['experiment']}")
    for check in bundle.summary["checks"]:
        mark = "PASS" if check["passed"] else "FAIL"
        print(
            f"  [{mark}] {check['check']}: {check['value']:g} "
            f"{check['op']} {check['tolerance']:g}"
        )
    print(f"result: {'PASS' if bundle.passed else 'FAIL'} "
          f"(wall {bundle.wall_time:.2f} s)")
    for path in bundle.outputs:
        print(f"wrote: {path}")
    return 0 if bundle.passed else 1


def _cmd_list() -> int:
    for name in list_experiments():
        print(name)
    return 0


def _cmd_describe(args) -> int:
    try:
        text = describe(args.name)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(text)
    return 0


def _cmd_verify_atom(args) -> int:
    path = Path(args.file)
    if not path.is_file():
        print(f"error: no such file: {path}", file=sys.stderr)
        return 2
    try:
        atom = atom_from_json(path.read_text())
    except (ValueError, KeyError) as exc:
        print(f"error: cannot read atom: {exc}", file=sys.stderr)
        return 2
    report = verify_atom(atom)
    print(json.dumps(_jsonable(report), indent=2, sort_keys=True))
    return 0 if report["passed"] else 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors and 0 on --help
        return int(exc.code or 0)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "list":
        return _cmd_list()
    if args.command == "describe":
        return _cmd_describe(args)
    return _cmd_verify_atom(args)


if __name__ == "__main__":
    sys.exit(main())

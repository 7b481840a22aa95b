"""Command line entry point: run scenarios, generate builtin fixtures."""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .scenario import ScenarioError, _sanitize, builtin_names, generate_builtin, run_scenario


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="fitzkit", description="Scenario runner for monotone-operator representation checks")
    sub = parser.add_subparsers(dest="command")

    p_run = sub.add_parser("run", help="run a scenario file and write reports")
    p_run.add_argument("file", help="scenario JSON file")
    p_run.add_argument("--out", default=None, help="base output directory (default: fitzkit-runs)")
    p_run.add_argument("--tol", type=float, default=None, help="override the scenario tolerance")
    p_run.add_argument("--seed", type=int, default=None, help="override the scenario seed")

    p_gen = sub.add_parser("gen", help="emit a canonical builtin scenario")
    p_gen.add_argument("name", help="one of: " + ", ".join(builtin_names()))
    p_gen.add_argument("--out", default=None, help="output file ('-' for stdout; default <name>.json)")

    sub.add_parser("version", help="print the version")

    args = parser.parse_args(argv)
    if args.command == "version":
        print(f"fitzkit {__version__}")
        return 0
    if args.command == "gen":
        try:
            scen = generate_builtin(args.name)
        except ScenarioError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        text = json.dumps(_sanitize(scen), sort_keys=True, indent=2) + "\n"
        if args.out == "-":
            sys.stdout.write(text)
        else:
            path = args.out or f"{scen['name']}.json"
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
            print(f"wrote {path}")
        return 0
    if args.command == "run":
        return run_scenario(args.file, out_base=args.out, tol=args.tol, seed=args.seed)
    parser.print_help()
    return 1


if __name__ == "__main__":
    sys.exit(main())

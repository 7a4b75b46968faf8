"""Command line entry point.

    condex run <scenario.json> [--solver S] [--out DIR] [--seed K]
    condex verify [--out DIR]
    condex list
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import List, Optional

from . import __version__
from .scenario import (SOLVERS, ScenarioError, SolverError, bundled_dir, bundled_scenarios,
                       load_scenario, run_scenario)


def _error_block(kind: str, message: str, **extra) -> str:
    return json.dumps({"error": {"type": kind, "message": message, **extra}}, sort_keys=True)


def _resolve(path: str) -> str:
    """A file path, or the name of a bundled scenario."""
    if os.path.exists(path):
        return path
    cand = os.path.join(bundled_dir(), path if path.endswith(".json") else path + ".json")
    if os.path.exists(cand):
        return cand
    return path


def cmd_run(args) -> int:
    path = _resolve(args.scenario)
    try:
        cfg = load_scenario(path)
        report = run_scenario(cfg, out_dir=args.out, solver=args.solver, seed=args.seed)
    except FileNotFoundError as exc:
        print(_error_block("FileNotFoundError", str(exc), scenario=path), file=sys.stderr)
        return 2
    except ScenarioError as exc:
        print(_error_block("ScenarioError", str(exc), scenario=path, line=exc.line), file=sys.stderr)
        return 2
    except Exception as exc:  # solver failures are reported verbatim
        print(_error_block(type(exc).__name__, str(exc), scenario=path), file=sys.stderr)
        return 3
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def run_bundled(out_dir: str) -> List[str]:
    """Run every bundled scenario into ``out_dir``; returns the failures."""
    failures = []
    for path in bundled_scenarios():
        try:
            run_scenario(load_scenario(path), out_dir=out_dir)
        except (ScenarioError, SolverError, RuntimeError, ValueError) as exc:
            failures.append(f"{os.path.basename(path)}: {type(exc).__name__}: {exc}")
    return failures


def cmd_verify(args) -> int:
    from .acceptance import run_all

    failures = run_bundled(args.out)
    for f in failures:
        print(_error_block("ScenarioFailure", f), file=sys.stderr)
    results = run_all(out_dir=args.out)
    width = max(len(r.title) for r in results)
    print(f"condex {__version__} acceptance")
    for r in results:
        print(f"{r.number:>2}  {r.title:<{width}}  {'PASS' if r.passed else 'FAIL'}  {r.detail}")
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} criteria passed; outputs in {args.out}")
    return 0 if n_pass == len(results) and not failures else 1


def cmd_list(args) -> int:
    for p in bundled_scenarios():
        print(os.path.splitext(os.path.basename(p))[0])
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="condex", description="Conditional extrema on E^m, S^2, H^2 and S^3.")
    ap.add_argument("--version", action="version", version=f"condex {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one scenario file (or bundled scenario name)")
    r.add_argument("scenario")
    r.add_argument("--solver", choices=SOLVERS, default=None)
    r.add_argument("--out", default=None, help="directory for CSV, SVG and summary JSON")
    r.add_argument("--seed", type=int, default=None)
    r.set_defaults(func=cmd_run)
    v = sub.add_parser("verify", help="run the acceptance suite and print a pass/fail table")
    v.add_argument("--out", default="condex-verify", help="directory for scenario outputs")
    v.set_defaults(func=cmd_verify)
    ls = sub.add_parser("list", help="list bundled scenarios")
    ls.set_defaults(func=cmd_list)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

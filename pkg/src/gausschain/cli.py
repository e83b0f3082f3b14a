"""Batch command-line front end.

Subcommands: compose, decompose, eb, threshold, bound, chain, selftest.
Exit codes: 0 success, 1 validation failure, 2 numerical-check failure.
The default output directory comes from $GAUSSCHAIN_OUT, falling back to the
working directory.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import selfcheck
from .errors import ScenarioError, ValidationError
from .numerics import set_tolerance_scale
from .runner import DEFAULT_OUT_ENV, run
from .scenario import parse_scenario, parse_scenario_json

_COMMAND_ANALYSES = {
    "compose": ("compose",),
    "decompose": ("decompose",),
    "eb": ("eb",),
    "threshold": ("thresholds",),
    "bound": ("bound",),
    "chain": None,  # scenario's requested outputs, or everything applicable
}


def _add_common(parser: argparse.ArgumentParser, needs_scenario: bool = True) -> None:
    if needs_scenario:
        parser.add_argument("--scenario", required=True, help="path to a scenario file (.json accepted)")
    parser.add_argument("--out", default=None, help=f"output directory (default ${DEFAULT_OUT_ENV} or '.')")
    parser.add_argument("--workers", type=int, default=1, help="concurrent sweep-point workers")
    parser.add_argument("--tol", type=float, default=None, help="override the numerical-check tolerance")
    parser.add_argument("--seed", type=int, default=selfcheck.DEFAULT_SEED, help="seed for randomized checks")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gausschain",
        description="Compose, decompose, and test chains of lossy segments and Gaussian stations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("compose", help="compose the chain into a single channel triplet")
    sub.add_parser("decompose", help="collapse the chain into front/total-loss/back factors")
    sub.add_parser("eb", help="entanglement-breaking verdicts for a loss/station/loss sandwich")
    sub.add_parser("threshold", help="closed-form and bisected breaking thresholds")
    sub.add_parser("bound", help="rate-loss upper bound of the chain's total transmittance")
    sub.add_parser("chain", help="run every analysis the scenario requests")
    selftest = sub.add_parser("selftest", help="run the bundled verification suite")
    selftest.add_argument(
        "--inject-fault",
        choices=("compose-noise",),
        default=None,
        help="dev mode: perturb the composition rule to prove the checks can fail",
    )
    for name, cmd in sub.choices.items():
        _add_common(cmd, needs_scenario=name != "selftest")
    return parser


def _load_scenario(path: str):
    text = Path(path).read_text(encoding="utf-8")
    if path.endswith(".json"):
        return parse_scenario_json(text)
    return parse_scenario(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out_dir = args.out or os.environ.get(DEFAULT_OUT_ENV) or "."
    if args.tol is not None:
        if args.tol <= 0:
            print("error: --tol must be positive", file=sys.stderr)
            return 1
        set_tolerance_scale(args.tol / 1e-10)

    if args.command == "selftest":
        results = selfcheck.run_all(seed=args.seed, fault=args.inject_fault)
        for result in results:
            print(result.line())
        failed = [r for r in results if not r.passed]
        print(f"{len(results) - len(failed)}/{len(results)} checks passed")
        return 2 if failed else 0

    try:
        scenario = _load_scenario(args.scenario)
    except FileNotFoundError:
        print(f"error: scenario file not found: {args.scenario}", file=sys.stderr)
        return 1
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    analyses = _COMMAND_ANALYSES[args.command]
    try:
        result = run(
            scenario,
            analyses=analyses,
            out_dir=out_dir,
            workers=max(1, args.workers),
            tol=args.tol,
            seed=args.seed,
        )
    except (ScenarioError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(result.report, end="")
    return 0 if result.numeric_ok else 2


if __name__ == "__main__":
    raise SystemExit(main())

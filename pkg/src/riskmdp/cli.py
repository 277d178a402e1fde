#!/usr/bin/env python3

import sys
from argparse import ArgumentParser, ArgumentTypeError, HelpFormatter, SUPPRESS
from pathlib import Path
from typing import Dict, List, NoReturn

from .risk_measures import RiskSpec
from .solver_report import FINITE_PREFIX

METHODS = ("policy-iter", "value-iter", "randomized")

#region argument types

def risk(text: str) -> RiskSpec:
    return RiskSpec.parse(text)

def method(text: str) -> str:
    if text in METHODS: return text

    if text.startswith(FINITE_PREFIX):
        horizon = text.removeprefix(FINITE_PREFIX)
        if horizon.isdigit() and int(horizon) > 0: return text

    raise ArgumentTypeError(f"expected finite:T, {', '.join(METHODS)} (got {text!r})")

def pmf(text: str) -> List[float]:
    """
    Parse a comma separated list of offer probabilities for `0, 1, ..., S_max`.
    """
    try:
        return [float(p) for p in text.split(",")]
    except ValueError:
        raise ArgumentTypeError(f"malformed probability list {text!r}") from None

def overrides(text: str) -> Dict[str, str]:
    """
    Parse `key=value` pairs separated by commas.
    """
    pairs = [item.partition("=") for item in text.split(",") if item.strip()]
    if any(not sep or not key.strip() for key, sep, _ in pairs): raise ArgumentTypeError(f"expected key=value pairs (got {text!r})")
    return {key.strip(): value.strip() for key, _, value in pairs}

#endregion

class Parser(ArgumentParser):
    """
    Usage errors count as validation errors and exit with status 1, leaving
    status 2 to inconclusive solver runs.
    """
    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")

def build_parser(package_name: str, version: str, description: str, epilog: str) -> ArgumentParser:
    formatter = lambda prog: HelpFormatter(prog,max_help_position=52)
    parser = Parser(prog=package_name, description=description, epilog=epilog, formatter_class=formatter)
    parser._positionals.title = "Commands"
    parser._optionals.title = "Arguments"

    parser.add_argument("-v", "--version", action="version", version=f"%(prog)s {version}")
    parser.add_argument("--verbose", default=SUPPRESS, action="store_true", help="print iteration counts and residuals")
    parser.add_argument("--logging", default=SUPPRESS, action="store_true", help="log solver progress")
    parser.add_argument("--config", type=Path, default=SUPPRESS, help="path to config file")
    parser.add_argument("--reset-config", default=False, action="store_true", help="reset default config file")

    subparser = parser.add_subparsers(dest="command")
    solve_parser = subparser.add_parser("solve", help="solve a model file")
    solve_parser.add_argument("-m", "--model", type=Path, help="path to the JSON model", required=True)
    solve_parser.add_argument("--method", type=method, default="value-iter", help="finite:T, policy-iter, value-iter or randomized")
    solve_parser.add_argument("--risk", type=risk, default=SUPPRESS, help="expectation, semidev:KAPPA or avar:ALPHA")
    solve_parser.add_argument("--tol", type=float, default=SUPPRESS, help="convergence tolerance")
    solve_parser.add_argument("--max-iter", type=int, default=SUPPRESS, help="iteration limit")
    solve_parser.add_argument("--inner-grid", type=int, default=SUPPRESS, help="grid points per simplex edge")
    solve_parser.add_argument("--inner-refinements", type=int, default=SUPPRESS, help="local refinement rounds")
    solve_parser.add_argument("-o", "--out", type=Path, default=SUPPRESS, help="write a JSON report")

    transient_parser = subparser.add_parser("check-transient", help="check risk-transience of a model")
    transient_parser.add_argument("-m", "--model", type=Path, help="path to the JSON model", required=True)
    policy_group = transient_parser.add_mutually_exclusive_group()
    policy_group.add_argument("--policy", type=Path, default=SUPPRESS, help="JSON file mapping states to controls")
    policy_group.add_argument("--uniform", default=False, action="store_true", help="check all stationary policies at once (default)")
    transient_parser.add_argument("--weight", type=str, default="default", help="'default' or a JSON file mapping states to weights")
    transient_parser.add_argument("--risk", type=risk, default=SUPPRESS, help="expectation, semidev:KAPPA or avar:ALPHA")
    transient_parser.add_argument("--tol", type=float, default=SUPPRESS, help="convergence tolerance")
    transient_parser.add_argument("--max-iter", type=int, default=SUPPRESS, help="iteration limit")

    example_parser = subparser.add_parser("example", help="run a built-in example")
    example_subparser = example_parser.add_subparsers(dest="example", required=True)

    asset_parser = example_subparser.add_parser("asset-selling", help="risk-averse asset selling threshold")
    asset_parser.add_argument("--pmf", type=pmf, help="offer probabilities for 0, 1, ..., S_max", required=True)
    asset_parser.add_argument("--c0", type=float, help="waiting cost per period", required=True)
    asset_parser.add_argument("--risk", type=risk, default=RiskSpec.expectation(), help="expectation, semidev:KAPPA or avar:ALPHA")

    transplant_parser = example_subparser.add_parser("transplant", help="organ transplant timing")
    transplant_parser.add_argument("--kappa", type=float, default=0.0, help="semideviation weight in [0, 1]")
    transplant_parser.add_argument("--table1", type=overrides, default=SUPPRESS, help="transition overrides, e.g. q_SS_W=0.999,q_SD_W=0.001")
    transplant_parser.add_argument("--table2", type=overrides, default=SUPPRESS, help="lifetime mixture overrides, e.g. w1=0.02")
    transplant_parser.add_argument("--randomized", default=False, action="store_true", help="also solve over randomized policies")

    verify_parser = subparser.add_parser("verify", help="recompute the residual of a JSON report")
    verify_parser.add_argument("-r", "--report", type=Path, help="path to the JSON report", required=True)

    return parser

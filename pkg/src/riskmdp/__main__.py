#!/usr/bin/env python3

import sys
from argparse import ArgumentParser, Namespace
from enum import IntEnum
from pathlib import Path
from typing import Any, Dict, Optional

from colorama import Fore, Style, deinit, just_fix_windows_console
from rich.markup import escape
from rich.panel import Panel
from rich.table import Table

from .cli import build_parser
from .dp_solver import DynamicProgramming
from .examples import AssetSellingSpec, TransplantSpec, asset_threshold, solve_transplant
from .internals import (
    ConfigHandler,
    DivergenceError,
    LogHandler,
    LogLevel,
    ModelValidationError,
    PolicyError,
    RiskSpecError,
    Settings,
    Status,
    __credits__,
    __package__,
    __version__,
    console,
    fmt,
    get_resource_path
)
from .mdp_core import Policy
from .model_file import ModelFile, load_policy, load_weight
from .multikernel import RiskMultikernel
from .randomized import RandomizedSolver
from .solver_report import FINITE_PREFIX, build_report, verify_report, write_report


class ExitCode(IntEnum):
    OK = 0
    INVALID = 1
    INCONCLUSIVE = 2
    DIVERGED = 3

    @classmethod
    def of(cls, status: Status) -> "ExitCode":
        match status:
            case Status.CONVERGED: return cls.OK
            case Status.DIVERGED: return cls.DIVERGED
            case _: return cls.INCONCLUSIVE

#region helpers

def init_config(cfg_path: Path) -> None:
    """
    Create a new configuration file by force, potentially overwriting existing data.
    """
    ConfigHandler.create_default(cfg_path)

def eval_config(args: Namespace, config: ConfigHandler) -> Settings:
    """
    Return a dictionary of config values, giving preference to command line arguments.
    """
    overrides = {
        "client": {"enable_logging": "logging", "verbose": "verbose"},
        "solver": {"tol": "tol", "max_iter": "max_iter"},
        "transience": {"tol": "tol", "max_iter": "max_iter"},
        "randomized": {"inner_grid": "inner_grid", "inner_refinements": "inner_refinements"},
    }

    return {
        section: {
            option: getattr(args, overrides[section][option], value) if option in overrides[section] else value
            for option, value in config.section(section).items() if option in config.defaults[section]
        }
        for section in overrides
    }

def print_solution(model_file: ModelFile, values: Dict[str, float], policy: Dict[str, Any], title: str) -> None:
    table = Table(title=title, title_justify="left")
    table.add_column("state", style="bold blue")
    table.add_column("value", justify="right")
    table.add_column("policy")

    for x, name in enumerate(model_file.model.states):
        decision = policy[name]
        if isinstance(decision, dict): decision = ", ".join(f"{u}:{fmt(p)}" for u, p in decision.items())
        table.add_row(name, fmt(values[name]), "-" if x == model_file.model.absorbing else str(decision))

    console.print(table)

#endregion

#region commands

def solve(args: Namespace, settings: Settings, logger: LogHandler) -> ExitCode:
    client = settings["client"]
    model_file = ModelFile.load(args.model, getattr(args, "risk", None))
    options = settings["solver"] | {"weight": model_file.weight, "logger": logger, "enable_logging": client["enable_logging"]}

    with console.status("solving..."):
        if args.method.startswith(FINITE_PREFIX):
            horizon = int(args.method.removeprefix(FINITE_PREFIX))
            solution = DynamicProgramming(model_file.model, model_file.spec, **options).solve_finite_horizon(horizon)
            status = Status.CONVERGED
        elif args.method == "randomized":
            solver = RandomizedSolver(model_file.model, model_file.spec, **options, **settings["randomized"])
            solution = solver.randomized_bellman_solve()
            status = solution.status
        else:
            dp = DynamicProgramming(model_file.model, model_file.spec, **options)
            solution = dp.policy_iteration() if args.method == "policy-iter" else dp.value_iteration()
            status = solution.status

    report = build_report(args.method, model_file, solution, settings["randomized"])
    print_solution(model_file, report["values"], report["policy"], f"{args.method} ({model_file.spec})")

    if client["verbose"]:
        console.print(f"STATUS={status.value}")
        console.print(f"ITERATIONS={report['iterations']}")
        console.print(f"RESIDUAL={report['residual']:.3e}")
        if "gap" in report: console.print(f"GAP={report['gap']:.3e}")

    if hasattr(args, "out"):
        write_report(args.out, report)
        console.print(f"PATH=[bold blue]{str(args.out)}[/]")

    return ExitCode.of(status)

def check_transient(args: Namespace, settings: Settings, logger: LogHandler) -> ExitCode:
    client = settings["client"]
    model_file = ModelFile.load(args.model, getattr(args, "risk", None))
    model = model_file.model
    weight = model_file.weight if args.weight == "default" else load_weight(model, args.weight)
    policy: Optional[Policy] = load_policy(model, args.policy) if hasattr(args, "policy") else None

    kernel = RiskMultikernel(model, model_file.spec, weight, logger=logger, enable_logging=client["enable_logging"], **settings["transience"])

    with console.status("iterating the risk multikernel..."):
        report = kernel.check_risk_transient(policy)

    color = {Status.CONVERGED: "green", Status.DIVERGED: "red"}.get(report.status, "yellow")
    bound = fmt(report.bound_K) if report.transient else "inf"
    console.print(f"[bold {color}]{report.verdict}[/], K={bound}")

    if client["verbose"]:
        console.print(f"UNIFORM={report.uniform}")
        console.print(f"ITERATIONS={report.iterations}")
        console.print(f"RESIDUAL={report.residual:.3e}")
        if report.divergence_detected_at is not None: console.print(f"DIVERGENCE_AT={report.divergence_detected_at}")

    return ExitCode.of(report.status)

def example(args: Namespace, settings: Settings, logger: LogHandler) -> ExitCode:
    client = settings["client"]

    match args.example:
        case "asset-selling":
            threshold = asset_threshold(AssetSellingSpec(args.pmf, args.c0, args.risk), logger=logger)
            console.print(f"X_STAR={threshold.x_star}")
            console.print(f"RESIDUAL={threshold.residual:.3e}")
            if threshold.at_edge: console.print("[bold yellow]WARNING:[/] threshold at the largest offer, only the best offer is ever accepted")

            if client["verbose"]:
                table = Table(title=f"asset selling ({args.risk})", title_justify="left")
                for column in ("best offer", "least expected gain", "value"): table.add_column(column, justify="right")
                for x, gain in enumerate(threshold.expected_gain): table.add_row(str(x), fmt(gain), fmt(threshold.value[x]))
                console.print(table)

        case "transplant":
            spec = TransplantSpec(kappa=args.kappa).with_overrides(getattr(args, "table1", {}) | getattr(args, "table2", {}))

            with console.status("solving..."):
                report = solve_transplant(spec, randomized=args.randomized, logger=logger, enable_logging=client["enable_logging"], **settings["solver"])

            console.print(f"R_L={fmt(report.r_L)}")
            console.print(f"ACTION={report.deterministic_action}")
            console.print(f"V_S={fmt(report.deterministic_value[0])}")

            if client["verbose"]:
                console.print(f"ALWAYS_W={fmt(report.always_wait)}")
                console.print(f"ALWAYS_T={fmt(report.always_transplant)}")

            if report.randomized_lambda is not None:
                console.print(f"LAMBDA_W={fmt(report.randomized_lambda['W'])}")
                console.print(f"LAMBDA_T={fmt(report.randomized_lambda['T'])}")
                console.print(f"V_S_RANDOMIZED={fmt(report.randomized_value[0])}")
                console.print(f"GAP={report.gap:.3e}")

    return ExitCode.OK

def verify(args: Namespace, settings: Settings, logger: LogHandler) -> ExitCode:
    residual = verify_report(args.report)
    console.print(f"RESIDUAL={residual:.3e}")
    return ExitCode.OK

#endregion

def _start(module_folder: Path, cfg_file: str) -> ArgumentParser:
    # Enable Windows' built-in ANSI support
    just_fix_windows_console()

    # Configure parser
    description = f"{Fore.WHITE}{Style.DIM}Risk-averse total-cost solver for transient Markov decision processes.{Style.RESET_ALL}"
    epilog = f"{Fore.WHITE}{Style.DIM}Authors: {','.join(__credits__)}{Style.RESET_ALL}"
    parser = build_parser(__package__, __version__, description, epilog)

    # Initialize default settings
    cfg_path = module_folder / cfg_file
    if not cfg_path.exists(): init_config(cfg_path)

    return parser

def main(argv: Optional[list]=None) -> int:
    module_folder = get_resource_path(__package__)
    cfg_file = f"{__package__}.ini"

    parser = _start(module_folder, cfg_file)
    args = parser.parse_args(argv)

    config = ConfigHandler(getattr(args, "config", module_folder / cfg_file))
    config.read()

    if args.reset_config:
        config.path.unlink(missing_ok=True)
        init_config(config.path)
        return ExitCode.OK

    if problems := config.validate():
        console.print("\n".join(f"[bold red]CONFIG:[/] {escape(problem)} in {config.path}" for problem in problems))
        return ExitCode.INVALID

    settings = eval_config(args, config)
    logger = LogHandler(name=__package__) \
        .set_base_path(module_folder) \
        .with_level(LogLevel(settings["client"]["log_level"])) \
        .add_handler(settings["client"]["log_file"])

    commands = {"solve": solve, "check-transient": check_transient, "example": example, "verify": verify}
    code = ExitCode.OK

    try:
        if args.command in commands:
            code = commands[args.command](args, settings, logger)
        else:
            parser.print_help()
    except KeyboardInterrupt:
        pass
    except DivergenceError as divergence:
        logger.error("divergence: %s" % divergence, stacklevel=2)
        console.print(f"[bold red]DIVERGENCE:[/] {escape(str(divergence))}")
        code = ExitCode.DIVERGED
    except (ModelValidationError, RiskSpecError, PolicyError, ValueError, OSError) as error:
        logger.error("ERROR: %s" % error, stacklevel=2)
        console.print(f"[bold red]ERROR:[/] {escape(str(error))}")
        code = ExitCode.INVALID
    except Exception as exception:
        logger.critical(exception, stacklevel=2)
        console.print_exception(show_locals=False)
        code = ExitCode.INVALID
    except:
        console.print(Panel(
            "\n".join([
                "[bold red]FATAL ERROR[/]",
                f"An unhandled exception was thrown. The log file may give you more insight into what went wrong: [bold yellow]{module_folder}[/]."
            ])
        ))
        code = ExitCode.INVALID
    finally:
        deinit()
        logger.shutdown()

    return int(code)

if __name__ == "__main__":
    sys.exit(main())

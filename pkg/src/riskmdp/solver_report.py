#!/usr/bin/env python3

import json
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import numpy as np

from .dp_solver import DynamicProgramming, FiniteHorizonSolution, InfiniteHorizonSolution
from .mdp_core import ValueFunction
from .model_file import ModelFile
from .randomized import RandomizedSolution, RandomizedSolver

type Report = Dict[str, Any]

FINITE_PREFIX = "finite:"


def build_report(
        method: str,
        model_file: ModelFile,
        solution: Union[FiniteHorizonSolution, InfiniteHorizonSolution],
        inner: Optional[Mapping[str, int]]=None
    ) -> Report:
    """
    Collect a solver result into a self-contained report: the model, its risk
    spec and weight are embedded so that `verify_report` needs nothing else.
    """
    model = model_file.model
    report: Report = {
        "method": method,
        "model": ModelFile(model, model_file.spec, model_file.weight).to_dict(),
    }

    if isinstance(solution, FiniteHorizonSolution):
        report |= {
            "status": "converged",
            "values": solution.values[0].as_names(model),
            "policy": solution.policies[0].as_names(model),
            "iterations": len(solution.values),
            "residual": solution.residual,
            "stages": [
                {"values": value.as_names(model), "policy": policy.as_names(model)}
                for value, policy in zip(solution.values, solution.policies)
            ],
        }
        return report

    report |= {
        "status": solution.status.value,
        "values": solution.value.as_names(model),
        "policy": solution.policy.as_names(model),
        "iterations": solution.iterations,
        "residual": solution.residual,
    }

    if isinstance(solution, RandomizedSolution):
        report["gap"] = solution.gap
        report["inner"] = dict(inner or {})

    return report


def write_report(path: Union[str, Path], report: Report, encoding: str="utf-8") -> None:
    with open(path, mode="w", encoding=encoding) as file_handler:
        json.dump(report, file_handler, indent=4)


def read_report(path: Union[str, Path], encoding: str="utf-8") -> Report:
    with open(path, mode="r", encoding=encoding) as file_handler:
        return json.load(file_handler)


def verify_report(report: Union[Report, str, Path]) -> float:
    """
    Recompute the residual of a written report from its embedded model.

    Finite-horizon reports are re-checked stage by stage, infinite-horizon
    reports by one application of the Bellman operator of their method.
    """
    if not isinstance(report, Mapping): report = read_report(report)

    model_file = ModelFile.from_dict(report["model"])
    model = model_file.model
    method = report["method"]

    def values_of(mapping: Mapping[str, float]) -> np.ndarray:
        return ValueFunction(np.array([mapping[name] for name in model.states]), model.absorbing).values

    if method.startswith(FINITE_PREFIX):
        dp = DynamicProgramming(model, model_file.spec, model_file.weight)
        stages = [values_of(stage["values"]) for stage in report["stages"]]
        successors = stages[1:] + [np.zeros(model.n)]
        return max(float(np.max(np.abs(dp.bellman_operator(successor)[0] - value))) for value, successor in zip(stages, successors))

    v = values_of(report["values"])

    if method == "randomized":
        solver = RandomizedSolver(model, model_file.spec, model_file.weight, **report.get("inner", {}))
        image, _ = solver.randomized_operator(v)
        return model_file.weight.norm(model, image - v)

    return DynamicProgramming(model, model_file.spec, model_file.weight).bellman_residual(v)

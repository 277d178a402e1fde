#!/usr/bin/env python3

from dataclasses import dataclass
from typing import List, Optional, Self


@dataclass(frozen=True, slots=True)
class Violation:
    """
    A single structural defect of a model, located by state and control
    identifiers where applicable.
    """
    message: str
    state: Optional[str]=None
    control: Optional[str]=None

    def __str__(self) -> str:
        where = ",".join(filter(None, [self.state, self.control]))
        return f"{self.message} ({where})" if where else self.message


class ModelValidationError(ValueError):
    def __init__(self: Self, violations: List[Violation]) -> None:
        self.violations = list(violations)
        super().__init__("; ".join(map(str, self.violations)) or "invalid model")


class RiskSpecError(ValueError):
    pass


class PolicyError(ValueError):
    pass


class DivergenceError(ArithmeticError):
    def __init__(
            self: Self,
            message: str,
            iteration: int,
            norm: float,
            policy: Optional[str]=None
        ) -> None:
        self.iteration = iteration
        self.norm = norm
        self.policy = policy
        details = f"{message} at iteration {iteration} (norm={norm:.6g})"
        super().__init__(f"{details}, policy {policy}" if policy else details)

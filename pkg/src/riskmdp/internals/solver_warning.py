#!/usr/bin/env python3

from typing import Self


class SolverWarning(Warning):
    """
    Base class of the warnings solvers issue through `warnings.warn`. The
    result of the call is still returned and carries its own `Status`.
    """
    def __init__(self: Self, message: str) -> None:
        super().__init__(message)
        self.message = message

    def __str__(self: Self) -> str:
        return self.message


class ConvergenceWarning(SolverWarning):
    """
    An iteration hit `max_iter` before it converged or diverged.
    """


class ComplexityWarning(SolverWarning):
    """
    The inner grid of the randomized solver exceeds `1e5` points per state.
    """

#!/usr/bin/env python3

from collections import deque
from enum import Enum, unique
from typing import Deque, Optional, Self

import numpy as np


@unique
class Status(Enum):
    CONVERGED = "converged"
    DIVERGED = "diverged"
    INCONCLUSIVE = "inconclusive"


def weighted_norm(values: np.ndarray, weight: np.ndarray) -> float:
    """
    Return `max |values(x)| / weight(x)` over the entries of `values`.
    Empty vectors have norm zero.
    """
    if values.size == 0: return 0.0
    return float(np.max(np.abs(values) / weight))


class IterationMonitor:
    """
    IterationMonitor
    ----------------
    Bookkeeping for fixed-point sweeps `v_{k+1} = T(v_k)` over the effective
    states of a model. Call `update` after every sweep; it returns a `Status`
    once a verdict is reached and `None` while the iteration should go on.

    - converged: the w-weighted sup norm of the update is at most `tol`
    - diverged: the w-norm of the iterate exceeds `blowup_threshold`, or the
      plain sup norm of the update has not decreased over `window` sweeps
    - inconclusive: `max_iter` sweeps without either verdict

    The stall rule relies on the operators being sup-norm nonexpansive, so
    update norms never increase; flat updates mean linear growth. Updates
    below `stall_floor` (default `1000 * tol`) never count as a stall.
    """
    stall_rtol = 1e-12

    def __init__(
            self: Self,
            weight: np.ndarray,
            tol: float=1e-9,
            max_iter: int=100_000,
            blowup_threshold: Optional[float]=None,
            window: Optional[int]=None,
            stall_floor: Optional[float]=None
        ) -> None:
        self.weight = np.asarray(weight, dtype=float)
        self.tol = tol
        self.max_iter = max_iter
        self.blowup_threshold = blowup_threshold if blowup_threshold is not None else 1e12 * float(np.max(self.weight, initial=1.0))
        self.window = window if window is not None else self.weight.size + 1
        self.stall_floor = stall_floor if stall_floor is not None else 1e3 * tol
        self.iterations = 0
        self.residual = np.inf
        self.norm = 0.0
        self.status: Optional[Status] = None
        self.__updates: Deque[float] = deque(maxlen=self.window + 1)

    def update(self: Self, previous: np.ndarray, current: np.ndarray) -> Optional[Status]:
        """
        Register one sweep given the effective parts of two consecutive iterates.
        """
        self.iterations += 1
        delta = current - previous
        self.residual = weighted_norm(delta, self.weight)
        self.norm = weighted_norm(current, self.weight)
        self.__updates.append(float(np.max(np.abs(delta), initial=0.0)))

        if not np.all(np.isfinite(current)) or self.norm > self.blowup_threshold:
            self.status = Status.DIVERGED
        elif self.residual <= self.tol:
            self.status = Status.CONVERGED
        elif self.stalled:
            self.status = Status.DIVERGED
        elif self.iterations >= self.max_iter:
            self.status = Status.INCONCLUSIVE

        return self.status

    @property
    def stalled(self: Self) -> bool:
        """
        `True` if the update has not shrunk over the last `window` sweeps.
        """
        if len(self.__updates) <= self.window or self.__updates[-1] <= self.stall_floor: return False
        return self.__updates[-1] >= self.__updates[0] * (1.0 - self.stall_rtol)

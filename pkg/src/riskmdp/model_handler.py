#!/usr/bin/env python3

import warnings
from typing import Optional, Self

import numpy as np

from .internals import ConvergenceWarning, IterationMonitor, LogHandler, LogLevel, Status, __package__
from .mdp_core import TransientMdp, WeightFunction, ensure_valid
from .risk_measures import RiskSpec


class ModelHandler:
    """
    ModelHandler
    ------------
    Common state of every solver: a validated, row-normalized model, the risk
    transition mapping, the weight function and the iteration settings.

    Set `enable_logging` to `True` and attach a handler to `logger` to record
    solver progress.

    ### Example
    ```python
    from riskmdp import DynamicProgramming, RiskSpec

    dp = DynamicProgramming(model, RiskSpec.avar(0.75), enable_logging=True)
    dp.logger.add_handler("rich_console")
    solution = dp.value_iteration()
    ```
    """
    __slots__ = [
        "model",
        "spec",
        "weight",
        "tol",
        "max_iter",
        "blowup_factor",
        "enable_logging",
        "logger",
        "log_every"
    ]

    _tol = 1e-9
    _max_iter = 100_000
    _blowup_factor = 1e12

    def __init__(
            self: Self,
            model: TransientMdp,
            spec: RiskSpec,
            weight: Optional[WeightFunction]=None,
            tol: float=_tol,
            max_iter: int=_max_iter,
            blowup_factor: float=_blowup_factor,
            enable_logging: bool=False,
            logger: Optional[LogHandler]=None
        ) -> None:
        self.model = ensure_valid(model)
        self.spec = spec
        self.weight = weight or WeightFunction.default(self.model)
        self.tol = tol
        self.max_iter = max_iter
        self.blowup_factor = blowup_factor
        self.enable_logging = enable_logging
        self.logger = logger or LogHandler(level=LogLevel.INFO, name=__package__)
        self.log_every = 1000

        if self.weight.w.size != self.model.effective.size:
            raise ValueError(f"weight function has {self.weight.w.size} entries, model has {self.model.effective.size} effective states")

    @property
    def blowup_threshold(self: Self) -> float:
        return self.blowup_factor * float(np.max(self.weight.w, initial=1.0))

    def monitor(self: Self, tol: Optional[float]=None, max_iter: Optional[int]=None, blowup_threshold: Optional[float]=None) -> IterationMonitor:
        """
        A fresh `IterationMonitor` with this handler's settings, optionally overridden.
        """
        return IterationMonitor(
            weight=self.weight.w,
            tol=self.tol if tol is None else tol,
            max_iter=self.max_iter if max_iter is None else max_iter,
            blowup_threshold=self.blowup_threshold if blowup_threshold is None else blowup_threshold
        )

    def phi(self: Self, x: int, u: int, v: np.ndarray) -> np.ndarray:
        """
        The argument function `c(x,u,.) + v(.)` of a Bellman backup.
        """
        return self.model.cost[x][u] + v

    def track(self: Self, method: str, monitor: IterationMonitor) -> None:
        """
        Log progress every `log_every` sweeps and once a verdict is reached.
        """
        if monitor.status is None and monitor.iterations % self.log_every: return
        self.logger.iteration(method, monitor.iterations, monitor.residual, hide=not self.enable_logging)

    def conclude(self: Self, method: str, monitor: IterationMonitor) -> Status:
        """
        Log the verdict of a finished iteration and warn if it is inconclusive.
        """
        self.track(method, monitor)

        if monitor.status is Status.INCONCLUSIVE:
            message = f"{method} stopped after {monitor.iterations} iterations with residual {monitor.residual:.3e}"
            self.logger.warning(message, hide=not self.enable_logging, stacklevel=2)
            warnings.warn(message, category=ConvergenceWarning, stacklevel=3)
        else:
            self.logger.verdict(method, monitor.status.value, monitor.iterations, monitor.residual, hide=not self.enable_logging)

        return monitor.status

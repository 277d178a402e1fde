#!/usr/bin/env python3

from dataclasses import dataclass
from typing import List, Optional, Self, Sequence, Tuple, Union

import numpy as np

from .internals import Status
from .mdp_core import Policy, PolicyKind, ValueFunction, effective_restriction
from .model_handler import ModelHandler


@dataclass(frozen=True, slots=True)
class RiskKernelSelector:
    """
    The per-state maximizing selector of the effective risk multikernel for one
    argument function: row `i` belongs to the `i`-th effective state and lies
    in the effective restriction of `A(x, Q(x, u))` for the control `controls[i]`.
    """
    matrix: np.ndarray
    controls: Tuple[int, ...]


@dataclass(frozen=True, slots=True)
class TransienceReport:
    transient: bool
    bound_K: float
    iterations: int
    divergence_detected_at: Optional[int]
    uniform: bool
    status: Status
    residual: float

    @property
    def verdict(self: Self) -> str:
        match self.status:
            case Status.CONVERGED: return "transient"
            case Status.DIVERGED: return "non-transient"
            case _: return "inconclusive"


class RiskMultikernel(ModelHandler):
    """
    RiskMultikernel
    ---------------
    Robust operators over the risk multikernel `x -> A(x, Q(x, pi(x)))` and the
    risk-transience check.

    Passing `policy=None` to `robust_apply` or `check_risk_transient`
    additionally maximizes over all controls of every state (the uniform check).
    """
    _tol = 1e-10

    def __init__(self: Self, *args, tol: float=_tol, **kwargs) -> None:
        super().__init__(*args, tol=tol, **kwargs)

    def robust_apply(
            self: Self,
            policy: Optional[Policy],
            v: Union[ValueFunction, np.ndarray]
        ) -> Tuple[ValueFunction, RiskKernelSelector]:
        """
        Return `x -> max_{mu in A(x, Q(x,pi(x)))} <w_bar + v, mu>` on the effective
        states (zero at the absorbing state) and the maximizing selector.
        """
        values = v.values if isinstance(v, ValueFunction) else np.asarray(v, dtype=float)
        new_v, selector = self._apply(self._choices(policy), values)
        return ValueFunction(new_v, self.model.absorbing), selector

    def check_risk_transient(
            self: Self,
            policy: Optional[Policy]=None,
            tol: Optional[float]=None,
            max_iter: Optional[int]=None,
            blowup_threshold: Optional[float]=None
        ) -> TransienceReport:
        """
        Iterate `d_{k+1} = robust_apply(d_k)` from `d_0 = 0`. The iterates are the
        largest partial sums `sum_{j=1}^{k+1} M^j w` over all selectors; the model
        is risk-transient if they converge and not risk-transient if they grow
        without bound.
        """
        choices = self._choices(policy)
        monitor = self.monitor(tol, max_iter, blowup_threshold)
        effective = self.model.effective
        d = np.zeros(self.model.n)

        while True:
            d_next, _ = self._apply(choices, d)
            status = monitor.update(d[effective], d_next[effective])
            d = d_next
            self.track("transience", monitor)
            if status is not None: break

        self.conclude("transience", monitor)

        return TransienceReport(
            transient=status is Status.CONVERGED,
            bound_K=monitor.norm,
            iterations=monitor.iterations,
            divergence_detected_at=monitor.iterations if status is Status.DIVERGED else None,
            uniform=policy is None,
            status=status,
            residual=monitor.residual
        )

    def classical_transience_bound(self: Self, policy: Policy) -> float:
        """
        `|| sum_{j>=1} (Q_pi)^j ||_w` of the effective kernel, computed as
        `(I - Q_pi)^{-1} - I`; infinite if the spectral radius is at least one.
        """
        q = effective_restriction(self.model, policy)
        if q.size == 0: return 0.0
        if np.max(np.abs(np.linalg.eigvals(q))) >= 1.0: return np.inf

        identity = np.eye(q.shape[0])
        series = np.linalg.solve(identity - q, identity) - identity
        return self.weight.operator_norm(np.clip(series, 0.0, None))

    def _choices(self: Self, policy: Optional[Policy]) -> List[Sequence[int]]:
        if policy is None:
            return [range(len(self.model.controls[x])) for x in range(self.model.n)]

        if policy.kind is not PolicyKind.DETERMINISTIC:
            raise TypeError("risk multikernels are defined for deterministic policies")

        policy.validate(self.model)
        return [(u,) for u in policy.assignment]

    def _apply(self: Self, choices: List[Sequence[int]], v: np.ndarray) -> Tuple[np.ndarray, RiskKernelSelector]:
        effective = self.model.effective
        target = self.weight.extended(self.model) + v
        new_v = np.zeros(self.model.n)
        rows = np.zeros((effective.size, effective.size))
        controls = []

        for i, x in enumerate(effective):
            best, best_u, best_mu = -np.inf, None, None

            for u in choices[x]:
                value = self.spec.max_selector(x, target, self.model.kernel[x][u])
                if value.sigma > best:
                    best, best_u, best_mu = value.sigma, u, value.maximizer

            new_v[x] = best
            rows[i] = best_mu[effective]
            controls.append(best_u)

        return new_v, RiskKernelSelector(rows, tuple(controls))

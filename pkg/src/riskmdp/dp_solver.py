#!/usr/bin/env python3

from dataclasses import dataclass, field
from typing import List, Optional, Self, Sequence, Tuple, Union

import numpy as np

from .internals import DivergenceError, Status
from .mdp_core import Policy, PolicyKind, ValueFunction
from .model_handler import ModelHandler
from .multikernel import RiskMultikernel

# relative margin a challenger must beat the incumbent control by
TIE_RTOL = 1e-12


@dataclass(frozen=True, slots=True)
class FiniteHorizonSolution:
    """
    Stage-wise values and decision rules in ascending stage order:
    `values[0]` is `v_1` and `policies[0]` is the first decision rule.
    `residual` is the largest deviation found when re-checking the dynamic
    programming equations after the solve.
    """
    values: List[ValueFunction]
    policies: List[Policy]
    residual: float


@dataclass(frozen=True, slots=True)
class InfiniteHorizonSolution:
    """
    `residual` is the w-weighted Bellman residual of `value`, re-verified by one
    extra application of the operator after the iteration stopped.
    """
    value: ValueFunction
    policy: Policy
    iterations: int
    residual: float
    status: Status
    trace: Tuple[np.ndarray, ...]=field(default=())

    @property
    def converged(self: Self) -> bool:
        return self.status is Status.CONVERGED


class DynamicProgramming(ModelHandler):
    """
    DynamicProgramming
    ------------------
    Risk-averse dynamic programming for total costs until absorption.

    - `solve_finite_horizon`: backward recursion over `T` stages
    - `evaluate_stationary_policy`: fixed point of `v <- D_pi v`
    - `policy_iteration` and `value_iteration`: optimal deterministic
      stationary policies from `v = D v`

    Every infinite-horizon method raises a `DivergenceError` when its iterates
    grow without bound, which means the model (or the evaluated policy) is not
    risk-transient.
    """

    #region operators

    def backup(self: Self, x: int, u: int, v: np.ndarray) -> float:
        """
        `sigma(c(x,u,.) + v(.), x, Q(x,u))`.
        """
        return self.spec.evaluate_sigma(x, self.phi(x, u, v), self.model.kernel[x][u])

    def policy_operator(self: Self, policy: Policy, v: np.ndarray) -> np.ndarray:
        """
        `[D_pi v](x)` on the effective states, zero at the absorbing state.
        """
        result = np.zeros(self.model.n)

        for x in self.model.effective:
            result[x] = self.backup(x, policy.assignment[x], v)

        return result

    def bellman_operator(self: Self, v: np.ndarray, incumbent: Optional[Policy]=None) -> Tuple[np.ndarray, Policy]:
        """
        `[D v](x) = min_u sigma(c(x,u,.) + v(.), x, Q(x,u))` and a minimizing
        policy. Ties keep the `incumbent` control if given, else the lowest index.
        """
        result = np.zeros(self.model.n)
        choices = [0] * self.model.n

        for x in self.model.effective:
            backups = [self.backup(x, u, v) for u in range(len(self.model.controls[x]))]
            u_star = int(np.argmin(backups))

            if incumbent is not None:
                u_inc = incumbent.assignment[x]
                margin = TIE_RTOL * max(1.0, abs(backups[u_inc]))
                if backups[u_inc] <= backups[u_star] + margin: u_star = u_inc

            result[x] = backups[u_star]
            choices[x] = u_star

        return result, Policy.deterministic(choices)

    def bellman_residual(self: Self, v: Union[ValueFunction, np.ndarray], policy: Optional[Policy]=None) -> float:
        """
        `|| D v - v ||_w`, or `|| D_pi v - v ||_w` if a `policy` is given.
        """
        values = v.values if isinstance(v, ValueFunction) else np.asarray(v, dtype=float)
        image = self.policy_operator(policy, values) if policy is not None else self.bellman_operator(values)[0]
        return self.weight.norm(self.model, image - values)

    #endregion

    #region finite horizon

    def evaluate_nested_risk(
            self: Self,
            policy: Union[Policy, Sequence[Policy]],
            T: int,
            terminal_v: Optional[np.ndarray]=None
        ) -> np.ndarray:
        """
        Return `J_T(Pi, .)` by the backward recursion
        `v_t(x) = sigma(c(x,pi_t(x),.) + v_{t+1}(.), x, Q(x,pi_t(x)))`,
        `v_{T+1} = terminal_v`. A sequence of policies is a Markov policy with
        one decision rule per stage, stage 1 first.
        """
        rules = self._stage_rules(policy, T)
        v = self._terminal(terminal_v)

        for t in reversed(range(T)):
            v = self.policy_operator(rules[t], v)

        return v

    def solve_finite_horizon(self: Self, T: int, terminal_v: Optional[np.ndarray]=None) -> FiniteHorizonSolution:
        """
        Solve `v_t(x) = min_u sigma(c(x,u,.) + v_{t+1}(.), x, Q(x,u))` for
        `t = T, ..., 1` with `v_{T+1} = terminal_v`, lowest control index among ties.
        """
        if T < 1: raise ValueError(f"horizon must be positive ({T=})")

        v = self._terminal(terminal_v)
        values: List[np.ndarray] = []
        policies: List[Policy] = []

        for t in reversed(range(1, T + 1)):
            v, rule = self.bellman_operator(v)
            values.append(v)
            policies.append(rule)
            self.logger.debug("finite horizon: stage %d solved", t, hide=not self.enable_logging)

        values.reverse()
        policies.reverse()

        successors = values[1:] + [self._terminal(terminal_v)]
        residual = max(
            float(np.max(np.abs(self.bellman_operator(successor)[0] - value), initial=0.0))
            for value, successor in zip(values, successors)
        )

        return FiniteHorizonSolution(
            values=[ValueFunction(value, self.model.absorbing) for value in values],
            policies=policies,
            residual=residual
        )

    #endregion

    #region infinite horizon

    def evaluate_stationary_policy(self: Self, policy: Policy, verify_transient: bool=False) -> InfiniteHorizonSolution:
        """
        Return `J_inf(Pi, .)` as the fixed point of `v <- D_pi v`, iterated from
        `v = 0`. With `verify_transient` the risk-transience of the policy is
        checked first instead of being trusted.

        Raise a `DivergenceError` if the iterates grow without bound.
        """
        self._deterministic(policy)

        if verify_transient:
            report = RiskMultikernel(self.model, self.spec, self.weight, logger=self.logger, enable_logging=self.enable_logging).check_risk_transient(policy)
            if report.status is Status.DIVERGED:
                raise DivergenceError("policy is not risk-transient", report.iterations, report.bound_K, self._describe(policy))

        monitor = self.monitor()
        effective = self.model.effective
        v = np.zeros(self.model.n)

        while True:
            v_next = self.policy_operator(policy, v)
            status = monitor.update(v[effective], v_next[effective])
            v = v_next
            self.track("policy evaluation", monitor)
            if status is not None: break

        self.conclude("policy evaluation", monitor)

        if status is Status.DIVERGED:
            raise DivergenceError("policy evaluation diverged", monitor.iterations, monitor.norm, self._describe(policy))

        return InfiniteHorizonSolution(
            value=ValueFunction(v, self.model.absorbing),
            policy=policy,
            iterations=monitor.iterations,
            residual=self.bellman_residual(v, policy),
            status=status
        )

    def policy_iteration(self: Self, initial_policy: Optional[Policy]=None) -> InfiniteHorizonSolution:
        """
        Alternate policy evaluation and greedy improvement until the policy
        repeats or no state improves by more than `tol`. Values of consecutive
        policies are nonincreasing; they are kept in `trace`. If an evaluation
        runs out of iterations, the run stops there and is inconclusive.
        """
        policy = initial_policy or Policy.first(self.model)
        self._deterministic(policy)

        evaluation = self.evaluate_stationary_policy(policy)
        trace = [evaluation.value.values]
        status = Status.INCONCLUSIVE

        for k in range(1, self.max_iter + 1):
            if evaluation.status is not Status.CONVERGED: break

            _, improved = self.bellman_operator(trace[-1], incumbent=policy)

            if improved == policy:
                status = Status.CONVERGED
                break

            policy = improved
            evaluation = self.evaluate_stationary_policy(policy)
            decrease = float(np.max(trace[-1] - evaluation.value.values))
            trace.append(evaluation.value.values)
            self.logger.iteration("policy iteration", k, decrease, hide=not self.enable_logging)

            if decrease < self.tol and evaluation.status is Status.CONVERGED:
                status = Status.CONVERGED
                break

        v = trace[-1]
        self.logger.info("policy iteration %s after %d improvements", status.value, len(trace) - 1, hide=not self.enable_logging)

        return InfiniteHorizonSolution(
            value=ValueFunction(v, self.model.absorbing),
            policy=policy,
            iterations=len(trace),
            residual=self.bellman_residual(v),
            status=status,
            trace=tuple(trace)
        )

    def value_iteration(self: Self, record_trace: bool=False) -> InfiniteHorizonSolution:
        """
        Iterate `v^{k+1} = D v^k` from `v^0 = 0` and return the limit with its
        greedy policy. An inconclusive run is returned with its last residual
        and a `ConvergenceWarning`.

        Raise a `DivergenceError` if the iterates grow without bound.
        """
        monitor = self.monitor()
        effective = self.model.effective
        v = np.zeros(self.model.n)
        trace = [v]

        while True:
            v_next, _ = self.bellman_operator(v)
            status = monitor.update(v[effective], v_next[effective])
            v = v_next
            if record_trace: trace.append(v)
            self.track("value iteration", monitor)
            if status is not None: break

        self.conclude("value iteration", monitor)

        if status is Status.DIVERGED:
            raise DivergenceError("value iteration diverged", monitor.iterations, monitor.norm)

        image, policy = self.bellman_operator(v)

        return InfiniteHorizonSolution(
            value=ValueFunction(v, self.model.absorbing),
            policy=policy,
            iterations=monitor.iterations,
            residual=self.weight.norm(self.model, image - v),
            status=status,
            trace=tuple(trace) if record_trace else ()
        )

    #endregion

    #region helpers

    def _terminal(self: Self, terminal_v: Optional[np.ndarray]) -> np.ndarray:
        if terminal_v is None: return np.zeros(self.model.n)

        values = np.array(terminal_v.values if isinstance(terminal_v, ValueFunction) else terminal_v, dtype=float)
        if values.shape != (self.model.n,): raise ValueError(f"terminal values must have {self.model.n} entries")
        if values[self.model.absorbing] != 0: raise ValueError("terminal value at the absorbing state must be zero")
        return values

    def _stage_rules(self: Self, policy: Union[Policy, Sequence[Policy]], T: int) -> List[Policy]:
        if T < 1: raise ValueError(f"horizon must be positive ({T=})")
        rules = [policy] * T if isinstance(policy, Policy) else list(policy)
        if len(rules) != T: raise ValueError(f"Markov policy has {len(rules)} decision rules for horizon {T}")
        for rule in rules: self._deterministic(rule)
        return rules

    def _deterministic(self: Self, policy: Policy) -> None:
        if policy.kind is not PolicyKind.DETERMINISTIC:
            raise TypeError("this method expects a deterministic policy, see RandomizedSolver for randomized ones")

        policy.validate(self.model)

    def _describe(self: Self, policy: Policy) -> str:
        return ", ".join(f"{state}->{control}" for state, control in policy.as_names(self.model).items())

    #endregion

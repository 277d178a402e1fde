#!/usr/bin/env python3

import itertools
import math
import warnings
from dataclasses import dataclass
from typing import List, Optional, Self, Sequence, Tuple, Type

import numpy as np

from .dp_solver import DynamicProgramming, InfiniteHorizonSolution, TIE_RTOL
from .internals import ComplexityWarning, DivergenceError, PolicyError, Status
from .mdp_core import PROBABILITY_ATOL, Policy, TransientMdp, ValueFunction
from .risk_measures import RiskSpec

# barycentric grids above this size trigger a ComplexityWarning
GRID_WARNING_SIZE = 100_000


@dataclass(frozen=True, slots=True)
class JointMeasure:
    """
    JointMeasure
    ------------
    The composed measure `[lambda o Q]_x` on the pairs `(u, y)` with
    `Q(y|x,u) > 0`, weighted by `lambda(u) * Q(y|x,u)`.
    """
    support: Tuple[Tuple[int, int], ...]
    weights: np.ndarray

    @classmethod
    def compose(cls: Type[Self], model: TransientMdp, x: int, lam: Sequence[float]) -> Self:
        lam = np.asarray(lam, dtype=float)
        size = len(model.controls[x])

        if lam.shape != (size,) or np.any(lam < 0) or abs(lam.sum() - 1.0) > PROBABILITY_ATOL:
            raise PolicyError(f"lambda must be a distribution over the {size} controls of state {model.states[x]!r}")

        controls, states = _pairs(model, x)
        weights = lam[controls] * model.kernel[x][controls, states]
        return cls(tuple(zip(controls.tolist(), states.tolist())), weights)

    def control_marginal(self: Self, size: int) -> np.ndarray:
        marginal = np.zeros(size)
        for (u, _), weight in zip(self.support, self.weights): marginal[u] += weight
        return marginal

    def conditional(self: Self, u: int, n: int) -> np.ndarray:
        """
        The distribution of the next state given control `u`; zero if `u` has
        no mass.
        """
        conditional = np.zeros(n)
        for (control, y), weight in zip(self.support, self.weights):
            if control == u: conditional[y] += weight

        total = conditional.sum()
        return conditional / total if total > 0 else conditional


def compose_measure(model: TransientMdp, x: int, lam: Sequence[float]) -> JointMeasure:
    return JointMeasure.compose(model, x, lam)


def sigma_joint(spec: RiskSpec, x: int, phi: Sequence[float], joint: JointMeasure) -> float:
    """
    `sigma(phi, x, [lambda o Q]_x)` with `phi` given on `joint.support`.
    """
    return spec.evaluate_sigma(x, phi, joint.weights)


@dataclass(frozen=True, slots=True)
class RandomizedSolution(InfiniteHorizonSolution):
    """
    `gap` is the final grid spacing of the inner simplex search, a proxy for
    the distance of each returned `lambda` to an exact minimizer.
    """
    gap: float=0.0


def simplex_grid(size: int, divisions: int) -> np.ndarray:
    """
    All points of the probability simplex over `size` controls whose
    coordinates are multiples of `1/divisions`, one per row, vertices included.
    """
    points = [
        np.diff((-1, *bars, divisions + size - 1)) - 1
        for bars in itertools.combinations(range(divisions + size - 1), size - 1)
    ]
    return np.array(points, dtype=float) / divisions


class RandomizedSolver(DynamicProgramming):
    """
    RandomizedSolver
    ----------------
    Stationary randomized policies: evaluation of `v <- D_lambda v` and the
    randomized Bellman equation `v(x) = min_lambda sigma(c + v, x, [lambda o Q]_x)`.

    The inner minimization over the simplex of every state runs on a
    barycentric grid with `inner_grid` points per edge and is refined
    `inner_refinements` times in a shrinking neighbourhood of the incumbent,
    dividing the spacing by `refine_factor` each round. Vertices win ties, so
    the deterministic decision is returned whenever it is optimal.
    """
    __slots__ = ["inner_grid", "inner_refinements", "refine_factor", "__pairs"]

    _inner_grid = 101
    _inner_refinements = 3
    _refine_factor = 22

    def __init__(
            self: Self,
            *args,
            inner_grid: int=_inner_grid,
            inner_refinements: int=_inner_refinements,
            refine_factor: int=_refine_factor,
            **kwargs
        ) -> None:
        super().__init__(*args, **kwargs)

        if inner_grid < 2: raise ValueError(f"inner grid needs at least two points per edge ({inner_grid=})")
        if refine_factor < 2: raise ValueError(f"refine factor must be at least two ({refine_factor=})")

        self.inner_grid = inner_grid
        self.inner_refinements = inner_refinements
        self.refine_factor = refine_factor
        self.__pairs = [_pairs(self.model, x) for x in range(self.model.n)]

    @property
    def gap(self: Self) -> float:
        return 1.0 / ((self.inner_grid - 1) * self.refine_factor ** self.inner_refinements)

    #region operators

    def joint_phi(self: Self, x: int, v: np.ndarray) -> np.ndarray:
        """
        `c(x,u,y) + v(y)` on the support of the composed measure in state `x`.
        """
        controls, states = self.__pairs[x]
        return self.model.cost[x][controls, states] + v[states]

    def randomized_policy_operator(self: Self, policy: Policy, v: np.ndarray) -> np.ndarray:
        """
        `[D_lambda v](x) = sigma(c(x,.,.) + v, x, [lambda(x) o Q]_x)`.
        """
        result = np.zeros(self.model.n)

        for x in self.model.effective:
            joint = compose_measure(self.model, x, policy.distribution(self.model, x))
            result[x] = sigma_joint(self.spec, x, self.joint_phi(x, v), joint)

        return result

    def randomized_operator(self: Self, v: np.ndarray) -> Tuple[np.ndarray, Policy]:
        """
        `min_lambda sigma(c(x,.,.) + v, x, [lambda o Q]_x)` in every effective
        state and the minimizing randomized policy.
        """
        result = np.zeros(self.model.n)
        distributions: List[np.ndarray] = []

        for x in range(self.model.n):
            size = len(self.model.controls[x])

            if x == self.model.absorbing or size == 1:
                # the simplex of a single control is its vertex
                if x != self.model.absorbing: result[x] = self.backup(x, 0, v)
                distributions.append(np.eye(size)[0])
                continue

            result[x], lam = self._inner_minimize(x, v)
            distributions.append(lam)

        return result, Policy.randomized(distributions)

    #endregion

    def evaluate_randomized_policy(self: Self, policy: Policy) -> InfiniteHorizonSolution:
        """
        Return the fixed point of `v <- D_lambda v` iterated from `v = 0`.
        Deterministic policies are evaluated as their Dirac counterparts.

        Raise a `DivergenceError` if the iterates grow without bound.
        """
        policy.validate(self.model)
        monitor = self.monitor()
        effective = self.model.effective
        v = np.zeros(self.model.n)

        while True:
            v_next = self.randomized_policy_operator(policy, v)
            status = monitor.update(v[effective], v_next[effective])
            v = v_next
            self.track("randomized evaluation", monitor)
            if status is not None: break

        self.conclude("randomized evaluation", monitor)

        if status is Status.DIVERGED:
            raise DivergenceError("randomized policy evaluation diverged", monitor.iterations, monitor.norm)

        return InfiniteHorizonSolution(
            value=ValueFunction(v, self.model.absorbing),
            policy=policy,
            iterations=monitor.iterations,
            residual=self.weight.norm(self.model, self.randomized_policy_operator(policy, v) - v),
            status=status
        )

    def randomized_bellman_solve(
            self: Self,
            tol: Optional[float]=None,
            max_iter: Optional[int]=None,
            inner_grid: Optional[int]=None,
            inner_refinements: Optional[int]=None
        ) -> RandomizedSolution:
        """
        Value iteration on the randomized Bellman equation from `v = 0`.

        Raise a `DivergenceError` if the iterates grow without bound.
        """
        if inner_grid is not None: self.inner_grid = inner_grid
        if inner_refinements is not None: self.inner_refinements = inner_refinements
        self._check_grid_size()

        monitor = self.monitor(tol, max_iter)
        effective = self.model.effective
        v = np.zeros(self.model.n)

        while True:
            v_next, _ = self.randomized_operator(v)
            status = monitor.update(v[effective], v_next[effective])
            v = v_next
            self.track("randomized value iteration", monitor)
            if status is not None: break

        self.conclude("randomized value iteration", monitor)

        if status is Status.DIVERGED:
            raise DivergenceError("randomized value iteration diverged", monitor.iterations, monitor.norm)

        image, policy = self.randomized_operator(v)

        return RandomizedSolution(
            value=ValueFunction(v, self.model.absorbing),
            policy=policy,
            iterations=monitor.iterations,
            residual=self.weight.norm(self.model, image - v),
            status=status,
            gap=self.gap
        )

    #region inner search

    def _inner_minimize(self: Self, x: int, v: np.ndarray) -> Tuple[float, np.ndarray]:
        controls, states = self.__pairs[x]
        q = self.model.kernel[x][controls, states]
        phi = self.joint_phi(x, v)
        size = len(self.model.controls[x])

        def objective(points: np.ndarray) -> np.ndarray:
            return self.spec.evaluate_sigma_batch(x, phi, points[:, controls] * q)

        divisions = self.inner_grid - 1
        points = simplex_grid(size, divisions)
        values = objective(points)
        best = int(np.argmin(values))
        lam, value = points[best], values[best]
        spacing = 1.0 / divisions

        offsets = np.arange(-self.refine_factor, self.refine_factor + 1)
        for _ in range(self.inner_refinements):
            step = spacing / self.refine_factor
            free = np.array(list(itertools.product(offsets, repeat=size - 1)), dtype=float) * step + lam[:-1]
            candidates = np.column_stack([free, 1.0 - free.sum(axis=1)])
            candidates = candidates[np.all(candidates >= -PROBABILITY_ATOL, axis=1)]
            candidates = np.clip(candidates, 0.0, None)
            candidates /= candidates.sum(axis=1, keepdims=True)

            values = objective(candidates)
            best = int(np.argmin(values))
            if values[best] < value: lam, value = candidates[best], values[best]
            spacing = step

        vertices = objective(np.eye(size))
        u = int(np.argmin(vertices))
        if vertices[u] <= value + TIE_RTOL * max(1.0, abs(value)):
            return float(vertices[u]), np.eye(size)[u]

        return float(value), lam

    def _check_grid_size(self: Self) -> None:
        largest = max(len(controls) for controls in self.model.controls)
        points = math.comb(self.inner_grid - 2 + largest, largest - 1)
        refined = (2 * self.refine_factor + 1) ** (largest - 1) if self.inner_refinements > 0 else 0

        if max(points, refined) > GRID_WARNING_SIZE:
            message = f"inner simplex search over {largest} controls evaluates {max(points, refined)} points per state and sweep"
            self.logger.warning(message, hide=not self.enable_logging)
            warnings.warn(message, category=ComplexityWarning, stacklevel=3)

    #endregion


def _pairs(model: TransientMdp, x: int) -> Tuple[np.ndarray, np.ndarray]:
    controls, states = np.nonzero(model.kernel[x] > 0)
    return controls, states

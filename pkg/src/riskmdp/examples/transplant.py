#!/usr/bin/env python3

from dataclasses import dataclass, fields, replace
from typing import Any, Dict, Mapping, Optional, Self, Type, Union

import numpy as np
from scipy.special import ndtr

from ..dp_solver import DynamicProgramming
from ..internals import LogHandler
from ..mdp_core import Policy, TransientMdp, ValueFunction
from ..randomized import RandomizedSolver
from ..risk_measures import RiskSpec

WAIT, TRANSPLANT = "W", "T"
STATES = ("S", "L", "D")

# 1 - F(x) below this counts as certain death
TAIL_GUARD = 1e-15


@dataclass(frozen=True, slots=True)
class TransplantSpec:
    """
    TransplantSpec
    --------------
    A patient waiting for an organ (state `S`) either waits another month
    (`W`, reward one month of life) or accepts the transplant (`T`), after
    which the remaining lifetime is summarized by its certainty equivalent
    `r_L` in state `L`. `D` is death.

    The lifetime distribution after transplant is a mixture of Weibull,
    lognormal and Gompertz laws (in years); survival starts at month
    `age_offset_months` and runs for `n_survival` months.
    """
    q_SS_W: float=0.99882
    q_SD_W: float=0.00118
    q_SL_T: float=0.90782
    q_SD_T: float=0.09218
    kappa: float=0.0
    n_survival: int=900
    age_offset_months: int=300
    max_lifetime_months: int=1200
    delta: float=0.297
    beta: float=0.225
    w1: float=0.0170
    m: float=3.11
    sigma: float=0.218
    w2: float=0.0092
    b: float=0.0000812
    alpha_g: float=0.0844
    w3: float=0.9737

    def __post_init__(self: Self) -> None:
        if abs(self.q_SS_W + self.q_SD_W - 1.0) > 1e-9 or abs(self.q_SL_T + self.q_SD_T - 1.0) > 1e-9:
            raise ValueError("transition probabilities from S must sum to one for each control")

        if not 0 <= self.kappa <= 1:
            raise ValueError(f"kappa must lie in [0, 1] ({self.kappa=})")

        if self.age_offset_months + self.n_survival > self.max_lifetime_months:
            raise ValueError("survival months exceed the maximum lifetime")

    @classmethod
    def parameters(cls: Type[Self]) -> Dict[str, type]:
        return {field.name: field.type for field in fields(cls)}

    def with_overrides(self: Self, overrides: Mapping[str, Union[str, float]]) -> Self:
        """
        Return a copy with some parameters replaced, e.g. `{"q_SS_W": 0.999, "q_SD_W": 0.001}`.
        """
        types = self.parameters()
        unknown = set(overrides) - set(types)
        if unknown: raise ValueError(f"unknown transplant parameters: {', '.join(sorted(unknown))}")
        return replace(self, **{key: types[key](value) for key, value in overrides.items()})


@dataclass(frozen=True, slots=True)
class TransplantReport:
    kappa: float
    r_L: float
    deterministic_action: str
    deterministic_value: ValueFunction
    always_wait: float
    always_transplant: float
    randomized_lambda: Optional[Dict[str, float]]=None
    randomized_value: Optional[ValueFunction]=None
    gap: Optional[float]=None

    def to_dict(self: Self) -> Dict[str, Any]:
        report = {
            "kappa": self.kappa,
            "r_L": self.r_L,
            "deterministic_action": self.deterministic_action,
            "deterministic_values": dict(zip(STATES, self.deterministic_value.values.tolist())),
            "always_wait": self.always_wait,
            "always_transplant": self.always_transplant,
        }

        if self.randomized_lambda is not None:
            report["randomized_lambda"] = self.randomized_lambda
            report["randomized_values"] = dict(zip(STATES, self.randomized_value.values.tolist()))
            report["gap"] = self.gap

        return report


def lifetime_cdf(spec: TransplantSpec, x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """
    `F(x)` of the lifetime mixture at age `x` in years; the lognormal term
    vanishes at `x = 0`.
    """
    years = np.asarray(x, dtype=float)
    if np.any(years < 0): raise ValueError("age must be nonnegative")

    with np.errstate(divide="ignore"):
        lognormal = ndtr((np.log(years) - spec.m) / spec.sigma)

    weibull = 1.0 - np.exp(-((years / spec.delta) ** spec.beta))
    gompertz = 1.0 - np.exp(-(spec.b / spec.alpha_g) * np.expm1(spec.alpha_g * years))
    result = spec.w1 * weibull + spec.w2 * lognormal + spec.w3 * gompertz
    return float(result) if result.ndim == 0 else result


def monthly_death_probs(spec: TransplantSpec) -> np.ndarray:
    """
    `p_k = (F(k/12 + 1/24) - F(k/12 - 1/24)) / (1 - F(k/12 - 1/24))` for
    `k = 1..max_lifetime_months`; entry `k - 1` holds `p_k`.
    """
    months = np.arange(1, spec.max_lifetime_months + 1, dtype=float)
    lower = lifetime_cdf(spec, months / 12 - 1 / 24)
    upper = lifetime_cdf(spec, months / 12 + 1 / 24)
    tail = 1.0 - lower

    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(tail > TAIL_GUARD, (upper - lower) / tail, 1.0)

    return np.clip(p, 0.0, 1.0)


def survival_chain(spec: TransplantSpec) -> np.ndarray:
    """
    Death probabilities of the survival states `i = 1..n_survival`; state `i`
    lives in month `age_offset_months + i - 1` and the last one dies surely.
    """
    p = monthly_death_probs(spec)
    start = spec.age_offset_months - 1
    chain = p[start:start + spec.n_survival].copy()
    chain[-1] = 1.0
    return chain


def survival_value(spec: TransplantSpec, kappa: Optional[float]=None) -> float:
    """
    Return `r_L = -v_1` from the mean-semideviation recursion
    `v_i = -1 + (1 - p_i) v_{i+1} - kappa p_i (1 - p_i) v_{i+1}`, `v_n = -1`.
    """
    kappa = spec.kappa if kappa is None else kappa
    p = survival_chain(spec)
    v = -1.0

    for p_i in p[-2::-1]:
        v = -1.0 + (1.0 - p_i) * v - kappa * p_i * (1.0 - p_i) * v

    return -v


def survival_expectation(spec: TransplantSpec) -> float:
    """
    Expected months of life after transplant, `sum_k prod_{j<k} (1 - p_j)`.
    """
    p = survival_chain(spec)
    alive = np.concatenate(([1.0], np.cumprod(1.0 - p[:-1])))
    return float(alive.sum())


def build_transplant_mdp(spec: TransplantSpec, r_L: float) -> TransientMdp:
    """
    The three-state model `S`, `L`, `D` with rewards turned into costs: `W`
    costs `-1`, `T` costs nothing, and `L` is absorbed at once with cost `-r_L`.
    """
    absorb = np.array([[0.0, 0.0, 1.0]])

    return TransientMdp(
        states=STATES,
        absorbing=2,
        controls=((WAIT, TRANSPLANT), ("continue",), ("stay",)),
        kernel=(
            np.array([[spec.q_SS_W, 0.0, spec.q_SD_W], [0.0, spec.q_SL_T, spec.q_SD_T]]),
            absorb,
            absorb
        ),
        cost=(
            np.array([[-1.0, -1.0, -1.0], [0.0, 0.0, 0.0]]),
            np.array([[0.0, 0.0, -r_L]]),
            np.zeros((1, 3))
        )
    )


def policy_values(dp: DynamicProgramming) -> Dict[str, ValueFunction]:
    """
    Values of the deterministic policies always-`W` and always-`T`.
    """
    return {
        control: dp.evaluate_stationary_policy(Policy.deterministic([u, 0, 0])).value
        for u, control in enumerate((WAIT, TRANSPLANT))
    }


def solve_transplant(
        spec: TransplantSpec,
        randomized: bool=False,
        logger: Optional[LogHandler]=None,
        enable_logging: bool=False,
        **options
    ) -> TransplantReport:
    """
    Compute `r_L`, the optimal deterministic action at `S` and, if requested,
    the optimal randomized decision rule at `S` under the mean-semideviation
    mapping with the spec's `kappa`. `options` are passed on to the solvers.
    """
    r_L = survival_value(spec)
    model = build_transplant_mdp(spec, r_L)
    risk = RiskSpec.semideviation(spec.kappa)

    dp = DynamicProgramming(model, risk, logger=logger, enable_logging=enable_logging, **options)
    optimum = dp.policy_iteration()
    action = model.controls[0][optimum.policy.assignment[0]]
    values = policy_values(dp)

    report = dict(
        kappa=spec.kappa,
        r_L=r_L,
        deterministic_action=action,
        deterministic_value=optimum.value,
        always_wait=values[WAIT][0],
        always_transplant=values[TRANSPLANT][0]
    )

    if randomized:
        solver = RandomizedSolver(model, risk, logger=logger, enable_logging=enable_logging, **options)
        solution = solver.randomized_bellman_solve()
        report.update(
            randomized_lambda=dict(zip((WAIT, TRANSPLANT), solution.policy.assignment[0].tolist())),
            randomized_value=solution.value,
            gap=solution.gap
        )

    return TransplantReport(**report)

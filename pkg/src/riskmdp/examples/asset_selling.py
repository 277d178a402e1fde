#!/usr/bin/env python3

from dataclasses import dataclass, field
from typing import Optional, Self, Type

import numpy as np

from ..dp_solver import DynamicProgramming
from ..internals import LogHandler, is_distribution
from ..mdp_core import TransientMdp, ValueFunction
from ..risk_measures import RiskSpec

SELL, WAIT = "sell", "wait"
SOLD = "sold"


@dataclass(frozen=True, eq=False)
class AssetSellingSpec:
    """
    AssetSellingSpec
    ----------------
    Offers `s = 0..S_max` arrive with probabilities `offer_pmf[s]`; every period
    spent waiting costs `waiting_cost`. The state is the best offer received so
    far, so accepting an earlier offer is always possible.
    """
    offer_pmf: np.ndarray
    waiting_cost: float
    risk: RiskSpec=field(default_factory=RiskSpec.expectation)

    def __post_init__(self: Self) -> None:
        pmf = np.array(self.offer_pmf, dtype=float)

        if pmf.ndim != 1 or pmf.size < 1 or not is_distribution(pmf, atol=1e-9):
            raise ValueError("offer pmf must be a finite probability vector")

        if not self.waiting_cost > 0:
            raise ValueError(f"waiting cost must be positive ({self.waiting_cost=})")

        if not isinstance(self.risk.kappa, float) or not isinstance(self.risk.alpha, float):
            raise ValueError("offer risk must use a single level for every state")

        pmf = pmf / pmf.sum()
        pmf.setflags(write=False)
        object.__setattr__(self, "offer_pmf", pmf)

    @property
    def max_offer(self: Self) -> int:
        return self.offer_pmf.size - 1

    @classmethod
    def uniform(cls: Type[Self], max_offer: int, waiting_cost: float, risk: Optional[RiskSpec]=None) -> Self:
        return cls(np.full(max_offer + 1, 1.0 / (max_offer + 1)), waiting_cost, risk or RiskSpec.expectation())


@dataclass(frozen=True, slots=True)
class AssetThreshold:
    """
    `x_star` is the smallest best offer at which selling is optimal and
    `value` the closed form `v*(x) = -max(x, x_star)` (zero once sold).
    `residual` is the sup norm of `D v* - v*` on the materialized model and
    `at_edge` flags thresholds at the largest offer.
    """
    x_star: int
    value: ValueFunction
    residual: float
    at_edge: bool
    expected_gain: np.ndarray


def build_asset_selling_mdp(spec: AssetSellingSpec) -> TransientMdp:
    """
    States `"0", ..., "S_max"` (best offer so far) and the absorbing `"sold"`.
    `sell` moves to `sold` with cost `-x`; `wait` costs `waiting_cost` and moves
    to `max(x, s)` for a fresh offer `s`.
    """
    size = spec.max_offer + 1
    n = size + 1
    sold = size
    cdf = np.cumsum(spec.offer_pmf)

    kernel, cost = [], []
    for x in range(size):
        wait = np.zeros(n)
        wait[x] = cdf[x]
        wait[x + 1:size] = spec.offer_pmf[x + 1:]

        sell = np.zeros(n)
        sell[sold] = 1.0

        kernel.append(np.array([sell, wait]))
        cost.append(np.array([np.where(sell > 0, -float(x), 0.0), np.full(n, spec.waiting_cost)]))

    stay = np.zeros((1, n))
    stay[0, sold] = 1.0
    kernel.append(stay)
    cost.append(np.zeros((1, n)))

    return TransientMdp(
        states=tuple(map(str, range(size))) + (SOLD,),
        absorbing=sold,
        controls=((SELL, WAIT),) * size + (("stay",),),
        kernel=tuple(kernel),
        cost=tuple(cost)
    )


def expected_gain(spec: AssetSellingSpec, x: int) -> float:
    """
    The least expected improvement `min_mu sum_s (s - x)_+ mu(s)` over the risk
    envelope of the offer distribution.
    """
    offers = np.arange(spec.max_offer + 1, dtype=float)
    return -spec.risk.evaluate_sigma(0, -np.maximum(offers - x, 0.0), spec.offer_pmf)


def asset_threshold(spec: AssetSellingSpec, logger: Optional[LogHandler]=None) -> AssetThreshold:
    """
    Scan `x = 0..S_max` for the smallest `x` whose least expected improvement
    does not exceed the waiting cost, and check `v*(x) = -max(x, x*)` against
    the Bellman equation of the materialized model.
    """
    gains = np.array([expected_gain(spec, x) for x in range(spec.max_offer + 1)])
    x_star = int(np.argmax(gains <= spec.waiting_cost))

    model = build_asset_selling_mdp(spec)
    values = np.append(-np.maximum(np.arange(spec.max_offer + 1, dtype=float), x_star), 0.0)
    dp = DynamicProgramming(model, spec.risk, logger=logger)
    image, _ = dp.bellman_operator(values)

    return AssetThreshold(
        x_star=x_star,
        value=ValueFunction(values, model.absorbing),
        residual=float(np.max(np.abs(image - values))),
        at_edge=x_star == spec.max_offer,
        expected_gain=gains
    )

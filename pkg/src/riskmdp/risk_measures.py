#!/usr/bin/env python3

from dataclasses import dataclass
from enum import Enum, unique
from typing import Any, Dict, Iterable, Mapping, Optional, Self, Sequence, Tuple, Type, Union

import numpy as np

from .internals import RiskSpecError

type Level = Union[float, Tuple[float, ...]]

DISTRIBUTION_ATOL = 1e-12


@unique
class RiskFamily(Enum):
    EXPECTATION = "expectation"
    MEAN_SEMIDEVIATION = "semideviation"
    AVAR = "avar"


@dataclass(frozen=True, slots=True)
class RiskValue:
    """
    The value of a risk transition mapping together with the envelope element
    attaining it.
    """
    sigma: float
    maximizer: np.ndarray


@dataclass(frozen=True, eq=False)
class RiskSpec:
    """
    RiskSpec
    --------
    A coherent one-step risk transition mapping `sigma(phi, x, m)` for costs.

    - `EXPECTATION`: the mean `<phi, m>`
    - `MEAN_SEMIDEVIATION`: the mean plus `kappa` times the upper
      semideviation, `kappa` in `[0, 1]`
    - `AVAR`: the average of the worst `alpha`-fraction of outcomes, `alpha`
      in `(0, 1]` (`alpha = 1` is the mean)

    `kappa` and `alpha` are either scalars or tuples with one entry per state.

    ```python
    >>> spec = RiskSpec.parse("semidev:1")
    >>> spec.evaluate_sigma(0, [1.0, 0.0], [0.5, 0.5])
    0.75
    ```
    """
    family: RiskFamily
    kappa: Level=0.0
    alpha: Level=1.0

    def __post_init__(self: Self) -> None:
        object.__setattr__(self, "kappa", _as_level(self.kappa))
        object.__setattr__(self, "alpha", _as_level(self.alpha))

        kappas = np.atleast_1d(self.kappa)
        alphas = np.atleast_1d(self.alpha)

        if self.family is RiskFamily.MEAN_SEMIDEVIATION and not np.all((0 <= kappas) & (kappas <= 1)):
            raise RiskSpecError(f"kappa must lie in [0, 1] ({self.kappa=})")

        if self.family is RiskFamily.AVAR and not np.all((0 < alphas) & (alphas <= 1)):
            raise RiskSpecError(f"alpha must lie in (0, 1] ({self.alpha=})")

    def __str__(self: Self) -> str:
        match self.family:
            case RiskFamily.EXPECTATION: return "expectation"
            case RiskFamily.MEAN_SEMIDEVIATION: return f"semidev:{_level_str(self.kappa)}"
            case RiskFamily.AVAR: return f"avar:{_level_str(self.alpha)}"

    #region constructors

    @classmethod
    def expectation(cls: Type[Self]) -> Self:
        return cls(RiskFamily.EXPECTATION)

    @classmethod
    def semideviation(cls: Type[Self], kappa: Level) -> Self:
        return cls(RiskFamily.MEAN_SEMIDEVIATION, kappa=kappa)

    @classmethod
    def avar(cls: Type[Self], alpha: Level) -> Self:
        return cls(RiskFamily.AVAR, alpha=alpha)

    @classmethod
    def parse(cls: Type[Self], text: str) -> Self:
        """
        Parse the command line grammar `expectation`, `semidev:KAPPA` or
        `avar:ALPHA`.
        """
        family, _, value = text.strip().lower().partition(":")

        try:
            match family:
                case "expectation" | "mean":
                    return cls.expectation()
                case "semidev" | "semideviation" | "mean-semideviation":
                    return cls.semideviation(float(value))
                case "avar" | "cvar":
                    return cls.avar(float(value))
        except ValueError as error:
            if isinstance(error, RiskSpecError): raise
            raise RiskSpecError(f"malformed risk parameter in {text!r}") from None

        raise RiskSpecError(f"unknown risk family in {text!r}, expected expectation, semidev:KAPPA or avar:ALPHA")

    @classmethod
    def from_dict(cls: Type[Self], document: Mapping[str, Any], states: Optional[Sequence[str]]=None) -> Self:
        """
        Build a spec from `{"family": ..., "kappa"|"alpha": scalar or map}`.
        Per-state maps need the ordered `states` of the model; a `"default"`
        key fills states that are not listed, and the absorbing state may be
        omitted altogether.
        """
        family = str(document.get("family", "expectation")).lower()
        key = {"semideviation": "kappa", "semidev": "kappa", "mean-semideviation": "kappa", "avar": "alpha"}.get(family)

        if key is None:
            return cls.parse(family)

        if key not in document:
            raise RiskSpecError(f"risk family {family!r} requires {key!r}")

        value = document[key]
        if isinstance(value, Mapping):
            if states is None: raise RiskSpecError(f"per-state {key} needs the model's states")
            fallback = value.get("default", 1.0 if key == "alpha" else 0.0)
            value = tuple(float(value.get(name, fallback)) for name in states)

        return cls.semideviation(value) if key == "kappa" else cls.avar(value)

    def to_dict(self: Self, states: Optional[Sequence[str]]=None) -> Dict[str, Any]:
        key, level = {
            RiskFamily.EXPECTATION: (None, None),
            RiskFamily.MEAN_SEMIDEVIATION: ("kappa", self.kappa),
            RiskFamily.AVAR: ("alpha", self.alpha),
        }[self.family]

        if key is None: return {"family": self.family.value}
        if isinstance(level, tuple) and states is not None: level = dict(zip(states, level))
        return {"family": self.family.value, key: list(level) if isinstance(level, tuple) else level}

    #endregion

    def level(self: Self, x: int) -> float:
        """
        The family parameter (`kappa` or `alpha`) in state `x`.
        """
        level = self.alpha if self.family is RiskFamily.AVAR else self.kappa
        return level[x] if isinstance(level, tuple) else level

    def evaluate_sigma(self: Self, x: int, phi: Sequence[float], m: Sequence[float]) -> float:
        """
        Evaluate `sigma(phi, x, m)`.
        """
        phi, m = _check(phi, m)

        match self.family:
            case RiskFamily.EXPECTATION:
                return float(phi @ m)
            case RiskFamily.MEAN_SEMIDEVIATION:
                mean = float(phi @ m)
                return mean + self.level(x) * float(np.maximum(phi - mean, 0.0) @ m)
            case RiskFamily.AVAR:
                return float(phi @ _avar_selector(phi, m, self.level(x)))

    def max_selector(self: Self, x: int, phi: Sequence[float], m: Sequence[float]) -> RiskValue:
        """
        Return an element `mu*` of the risk envelope `A(x, m)` with
        `<phi, mu*> = sigma(phi, x, m)`.

        Semideviation uses `h_j = kappa [phi_j > <phi, m>]` and
        `mu*_j = m_j (1 + h_j - <h, m>)`; AVaR fills the density cap `1/alpha`
        in decreasing order of `phi`, lower state index first among ties.
        """
        phi, m = _check(phi, m)

        match self.family:
            case RiskFamily.EXPECTATION:
                mu = m.copy()
            case RiskFamily.MEAN_SEMIDEVIATION:
                h = self.level(x) * (phi > phi @ m)
                mu = m * (1.0 + h - h @ m)
            case RiskFamily.AVAR:
                mu = _avar_selector(phi, m, self.level(x))

        return RiskValue(float(phi @ mu), mu)

    def envelope_mass_bounds(self: Self, x: int, m: Sequence[float], target: Iterable[int]) -> Tuple[float, float]:
        """
        Return `(min mu(B), max mu(B))` over the risk envelope `A(x, m)` for the
        set `B` of support indices in `target`.
        """
        m = np.asarray(m, dtype=float)
        indicator = np.zeros(m.size)
        indicator[list(target)] = 1.0
        return -self.evaluate_sigma(x, -indicator, m), self.evaluate_sigma(x, indicator, m)

    def evaluate_sigma_batch(self: Self, x: int, phi: np.ndarray, measures: np.ndarray) -> np.ndarray:
        """
        Evaluate `sigma(phi, x, m)` for every row `m` of `measures` at once.
        Rows are trusted to be distributions on the support of `phi`.
        """
        phi = np.asarray(phi, dtype=float)
        measures = np.atleast_2d(measures)
        means = measures @ phi

        match self.family:
            case RiskFamily.EXPECTATION:
                return means
            case RiskFamily.MEAN_SEMIDEVIATION:
                upper = np.maximum(phi[np.newaxis, :] - means[:, np.newaxis], 0.0)
                return means + self.level(x) * np.sum(measures * upper, axis=1)
            case RiskFamily.AVAR:
                order = np.argsort(-phi, kind="stable")
                caps = measures[:, order] / self.level(x)
                before = np.cumsum(caps, axis=1) - caps
                mu = np.clip(np.minimum(caps, 1.0 - before), 0.0, None)
                return mu @ phi[order]


def _avar_selector(phi: np.ndarray, m: np.ndarray, alpha: float) -> np.ndarray:
    """
    Greedy maximizer over `{mu : 0 <= mu <= m / alpha, sum(mu) = 1}`.
    """
    order = np.argsort(-phi, kind="stable")
    caps = m[order] / alpha
    before = np.cumsum(caps) - caps
    mu = np.empty_like(m)
    mu[order] = np.clip(np.minimum(caps, 1.0 - before), 0.0, None)
    return mu


def _check(phi: Sequence[float], m: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    phi = np.asarray(phi, dtype=float)
    m = np.asarray(m, dtype=float)

    if phi.shape != m.shape or phi.ndim != 1:
        raise RiskSpecError(f"phi and m must be vectors of equal length ({phi.shape=}, {m.shape=})")

    if np.any(m < 0) or abs(m.sum() - 1.0) > DISTRIBUTION_ATOL:
        raise RiskSpecError("m must be a probability vector")

    return phi, m


def _as_level(level: Union[float, Sequence[float]]) -> Level:
    if isinstance(level, (int, float, np.floating, np.integer)): return float(level)
    return tuple(float(v) for v in level)


def _level_str(level: Level) -> str:
    return f"{level:g}" if isinstance(level, float) else ",".join(f"{v:g}" for v in level)

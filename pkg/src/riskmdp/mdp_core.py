#!/usr/bin/env python3

from dataclasses import dataclass, field
from enum import Enum, unique
from typing import Any, Dict, List, Mapping, Optional, Self, Sequence, Tuple, Type, Union

import numpy as np

from .internals import ModelValidationError, PolicyError, Violation, weighted_norm

PROBABILITY_ATOL = 1e-12

type Assignment = Union[str, Mapping[str, float]]


@dataclass(frozen=True, eq=False)
class TransientMdp:
    """
    TransientMdp
    ------------
    A finite controlled Markov model with one absorbing state.

    `kernel[x]` and `cost[x]` are arrays of shape `(len(controls[x]), n)`:
    row `u` of `kernel[x]` is the distribution `Q(.|x,u)` and row `u` of
    `cost[x]` holds the transition costs `c(x,u,.)`.

    Construction does not check the model; use `validate` or `ensure_valid`.
    """
    states: Tuple[str, ...]
    absorbing: int
    controls: Tuple[Tuple[str, ...], ...]
    kernel: Tuple[np.ndarray, ...]
    cost: Tuple[np.ndarray, ...]
    __index: Dict[str, int] = field(init=False, repr=False)

    def __post_init__(self: Self) -> None:
        object.__setattr__(self, "states", tuple(map(str, self.states)))
        object.__setattr__(self, "controls", tuple(tuple(map(str, u)) for u in self.controls))
        object.__setattr__(self, "kernel", tuple(_frozen(k) for k in self.kernel))
        object.__setattr__(self, "cost", tuple(_frozen(c) for c in self.cost))
        object.__setattr__(self, "_TransientMdp__index", {name: i for i, name in enumerate(self.states)})

    @property
    def n(self: Self) -> int:
        return len(self.states)

    @property
    def effective(self: Self) -> np.ndarray:
        """
        Indices of the non-absorbing states in ascending order.
        """
        return np.array([x for x in range(self.n) if x != self.absorbing], dtype=int)

    def index_of(self: Self, state: Union[str, int]) -> int:
        """
        Resolve a state identifier (or pass an index through).
        """
        if isinstance(state, (int, np.integer)): return int(state)

        try:
            return self.__index[str(state)]
        except KeyError:
            raise KeyError(f"unknown state ({state=})") from None

    def control_index(self: Self, state: Union[str, int], control: Union[str, int]) -> int:
        """
        Resolve a control identifier of `state` (or pass an index through).
        """
        x = self.index_of(state)
        if isinstance(control, (int, np.integer)): return int(control)

        try:
            return self.controls[x].index(str(control))
        except ValueError:
            raise PolicyError(f"control {control!r} is not available in state {self.states[x]!r}") from None

    def normalized(self: Self) -> Self:
        """
        Return a copy whose transition rows are rescaled to sum to one.
        """
        kernel = tuple(k / k.sum(axis=1, keepdims=True) for k in self.kernel)
        return TransientMdp(self.states, self.absorbing, self.controls, kernel, self.cost)

    @classmethod
    def from_dict(cls: Type[Self], document: Mapping[str, Any]) -> Self:
        """
        Build a model from the JSON model schema. Unspecified transitions have
        probability zero and unspecified costs are zero.

        Raise a `ModelValidationError` on schema violations (unknown states or
        controls, missing keys); structural checks are left to `validate`.
        """
        violations: List[Violation] = []

        try:
            states = [str(s) for s in document["states"]]
            absorbing_name = str(document["absorbing"])
            control_map = document["controls"]
        except (KeyError, TypeError) as error:
            raise ModelValidationError([Violation(f"missing or malformed key {error}")]) from None

        index = {name: i for i, name in enumerate(states)}
        if absorbing_name not in index:
            raise ModelValidationError([Violation("absorbing state is not a member of states", state=absorbing_name)])

        controls = [[str(u) for u in control_map.get(name, [])] for name in states]
        n = len(states)
        kernel = [np.zeros((len(u), n)) for u in controls]
        cost = [np.zeros((len(u), n)) for u in controls]

        def locate(entry: Mapping[str, Any], key: str) -> Optional[Tuple[int, int, int]]:
            x, u, y = str(entry.get("x")), str(entry.get("u")), str(entry.get("y"))

            if x not in index or y not in index:
                violations.append(Violation(f"{key} entry references an unknown state", state=x if x not in index else y, control=u))
                return None

            if u not in controls[index[x]]:
                violations.append(Violation(f"{key} entry references an unknown control", state=x, control=u))
                return None

            return index[x], controls[index[x]].index(u), index[y]

        def number(entry: Mapping[str, Any], key: str) -> Optional[float]:
            try:
                return float(entry[key])
            except (KeyError, TypeError, ValueError):
                x, u, y = entry.get("x"), entry.get("u"), entry.get("y")
                violations.append(Violation(f"entry towards {y!r} needs a numeric {key!r}, got {entry.get(key)!r}", state=str(x), control=str(u)))
                return None

        for entry in document.get("transitions", []):
            if (coordinates := locate(entry, "transition")) is None: continue
            if (p := number(entry, "p")) is None: continue
            x, u, y = coordinates
            kernel[x][u, y] += p

        for entry in document.get("costs", []):
            if (coordinates := locate(entry, "cost")) is None: continue
            if (c := number(entry, "c")) is None: continue
            x, u, y = coordinates
            cost[x][u, y] = c

        if violations: raise ModelValidationError(violations)

        return cls(tuple(states), index[absorbing_name], tuple(map(tuple, controls)), tuple(kernel), tuple(cost))

    def to_dict(self: Self) -> Dict[str, Any]:
        """
        Serialize the model to the JSON model schema, omitting zero entries.
        """
        return {
            "states": list(self.states),
            "absorbing": self.states[self.absorbing],
            "controls": {name: list(self.controls[x]) for x, name in enumerate(self.states)},
            "transitions": [
                {"x": self.states[x], "u": self.controls[x][u], "y": self.states[y], "p": float(self.kernel[x][u, y])}
                for x in range(self.n) for u in range(len(self.controls[x])) for y in range(self.n)
                if self.kernel[x][u, y] != 0
            ],
            "costs": [
                {"x": self.states[x], "u": self.controls[x][u], "y": self.states[y], "c": float(self.cost[x][u, y])}
                for x in range(self.n) for u in range(len(self.controls[x])) for y in range(self.n)
                if self.cost[x][u, y] != 0
            ],
        }


@unique
class PolicyKind(Enum):
    DETERMINISTIC = "deterministic"
    RANDOMIZED = "randomized"


@dataclass(frozen=True, eq=False)
class Policy:
    """
    Policy
    ------
    A stationary Markov decision rule. Deterministic policies assign a control
    index to every state; randomized policies assign a probability vector over
    the controls of every state.
    """
    kind: PolicyKind
    assignment: Tuple[Union[int, np.ndarray], ...]

    @classmethod
    def deterministic(cls: Type[Self], choices: Sequence[int]) -> Self:
        return cls(PolicyKind.DETERMINISTIC, tuple(int(u) for u in choices))

    @classmethod
    def randomized(cls: Type[Self], distributions: Sequence[Sequence[float]]) -> Self:
        return cls(PolicyKind.RANDOMIZED, tuple(_frozen(np.asarray(d, dtype=float)) for d in distributions))

    @classmethod
    def first(cls: Type[Self], model: TransientMdp) -> Self:
        """
        The deterministic policy choosing the lowest control index everywhere.
        """
        return cls.deterministic([0] * model.n)

    @classmethod
    def from_names(cls: Type[Self], model: TransientMdp, mapping: Mapping[str, Assignment]) -> Self:
        """
        Build a policy from state names to either a control name (deterministic)
        or a map from control names to probabilities (randomized). States that
        are missing from `mapping` use their first control.
        """
        randomized = any(isinstance(value, Mapping) for value in mapping.values())

        if not randomized:
            return cls.deterministic([
                model.control_index(x, mapping[name]) if name in mapping else 0
                for x, name in enumerate(model.states)
            ])

        distributions = []
        for x, name in enumerate(model.states):
            weights = np.zeros(len(model.controls[x]))
            value = mapping.get(name, model.controls[x][0])

            if isinstance(value, Mapping):
                for control, probability in value.items():
                    weights[model.control_index(x, control)] = float(probability)
            else:
                weights[model.control_index(x, value)] = 1.0

            distributions.append(weights)

        return cls.randomized(distributions)

    def as_names(self: Self, model: TransientMdp) -> Dict[str, Assignment]:
        if self.kind is PolicyKind.DETERMINISTIC:
            return {name: model.controls[x][self.assignment[x]] for x, name in enumerate(model.states)}

        return {
            name: {model.controls[x][u]: float(p) for u, p in enumerate(self.assignment[x])}
            for x, name in enumerate(model.states)
        }

    def distribution(self: Self, model: TransientMdp, x: int) -> np.ndarray:
        """
        The distribution over `U(x)` this policy uses in state `x`.
        """
        if self.kind is PolicyKind.RANDOMIZED: return self.assignment[x]

        dirac = np.zeros(len(model.controls[x]))
        dirac[self.assignment[x]] = 1.0
        return dirac

    def validate(self: Self, model: TransientMdp) -> None:
        """
        Raise a `PolicyError` if the policy does not fit `model`.
        """
        if len(self.assignment) != model.n:
            raise PolicyError(f"policy covers {len(self.assignment)} states, model has {model.n}")

        for x, value in enumerate(self.assignment):
            size = len(model.controls[x])

            if self.kind is PolicyKind.DETERMINISTIC:
                if not 0 <= value < size:
                    raise PolicyError(f"control index {value} is not available in state {model.states[x]!r}")
                continue

            if value.shape != (size,) or np.any(value < 0) or abs(value.sum() - 1.0) > PROBABILITY_ATOL:
                raise PolicyError(f"decision rule in state {model.states[x]!r} is not a distribution over its {size} controls")

    def __eq__(self: Self, other: object) -> bool:
        if not isinstance(other, Policy) or self.kind is not other.kind: return False
        return all(np.array_equal(a, b) for a, b in zip(self.assignment, other.assignment, strict=True))

    def __hash__(self: Self) -> int:
        return hash((self.kind, tuple(np.asarray(a).tobytes() for a in self.assignment)))


@dataclass(frozen=True, eq=False)
class ValueFunction:
    """
    A real vector over all states, pinned to zero at the absorbing state.
    """
    values: np.ndarray
    absorbing: int

    def __post_init__(self: Self) -> None:
        values = np.array(self.values, dtype=float)

        if values[self.absorbing] != 0:
            raise ValueError(f"value at the absorbing state must be zero, found {values[self.absorbing]}")

        object.__setattr__(self, "values", _frozen(values))

    def __getitem__(self: Self, x: int) -> float:
        return float(self.values[x])

    def __len__(self: Self) -> int:
        return self.values.size

    def as_names(self: Self, model: TransientMdp) -> Dict[str, float]:
        return {name: float(self.values[x]) for x, name in enumerate(model.states)}


@dataclass(frozen=True, eq=False)
class WeightFunction:
    """
    WeightFunction
    --------------
    A weight `w(x) >= 1` over the effective states of a model, stored in the
    order of `TransientMdp.effective`.
    """
    w: np.ndarray

    def __post_init__(self: Self) -> None:
        w = np.array(self.w, dtype=float)

        if np.any(w < 1) or not np.all(np.isfinite(w)):
            raise ValueError("weight function entries must be finite and at least 1")

        object.__setattr__(self, "w", _frozen(w))

    @classmethod
    def default(cls: Type[Self], model: TransientMdp) -> Self:
        return cls(np.ones(model.n - 1))

    @classmethod
    def from_names(cls: Type[Self], model: TransientMdp, mapping: Mapping[str, float]) -> Self:
        """
        Missing effective states default to weight one.
        """
        return cls(np.array([float(mapping.get(model.states[x], 1.0)) for x in model.effective]))

    def extended(self: Self, model: TransientMdp) -> np.ndarray:
        """
        The weight over all states with `w(x_A) = 0`.
        """
        w_bar = np.zeros(model.n)
        w_bar[model.effective] = self.w
        return w_bar

    def norm(self: Self, model: TransientMdp, values: np.ndarray) -> float:
        """
        `max |v(x)| / w(x)` over the effective states of a full-length vector.
        """
        return weighted_norm(np.asarray(values)[model.effective], self.w)

    def operator_norm(self: Self, matrix: np.ndarray) -> float:
        """
        `max_x (1/w(x)) sum_y w(y) A(y|x)` for a nonnegative matrix over the
        effective states.
        """
        if matrix.size == 0: return 0.0
        return float(np.max(matrix @ self.w / self.w))


def validate(model: TransientMdp) -> List[Violation]:
    """
    Collect every structural violation of `model`. The model is valid if and
    only if the returned list is empty.
    """
    violations: List[Violation] = []
    n = model.n

    if n < 2: violations.append(Violation("model needs at least two states"))
    if len(set(model.states)) != n: violations.append(Violation("state identifiers are not unique"))

    if not 0 <= model.absorbing < n:
        violations.append(Violation(f"absorbing index {model.absorbing} out of range"))
        return violations

    if not (len(model.controls) == len(model.kernel) == len(model.cost) == n):
        violations.append(Violation("controls, kernel and cost must cover every state"))
        return violations

    for x, name in enumerate(model.states):
        controls = model.controls[x]

        if not controls:
            violations.append(Violation("empty control set", state=name))
            continue

        if len(set(controls)) != len(controls):
            violations.append(Violation("control identifiers are not unique", state=name))

        expected = (len(controls), n)
        if model.kernel[x].shape != expected or model.cost[x].shape != expected:
            violations.append(Violation(f"kernel and cost must have shape {expected}", state=name))
            continue

        for u, control in enumerate(controls):
            row = model.kernel[x][u]
            costs = model.cost[x][u]

            if not np.all(np.isfinite(row)) or np.any(row < 0):
                violations.append(Violation("negative or non-finite probability", state=name, control=control))
            elif abs(row.sum() - 1.0) > PROBABILITY_ATOL:
                violations.append(Violation(f"row not stochastic (sum={row.sum():.15g})", state=name, control=control))

            if not np.all(np.isfinite(costs)):
                violations.append(Violation("cost entry not finite", state=name, control=control))

            if x == model.absorbing:
                if abs(row[x] - 1.0) > PROBABILITY_ATOL:
                    violations.append(Violation("absorbing state is not absorbing", state=name, control=control))
                if costs[x] != 0:
                    violations.append(Violation("absorbing cost nonzero", state=name, control=control))

    return violations


def ensure_valid(model: TransientMdp) -> TransientMdp:
    """
    Return the row-normalized model, or raise a `ModelValidationError` listing
    every violation.
    """
    violations = validate(model)
    if violations: raise ModelValidationError(violations)
    return model.normalized()


def effective_restriction(model: TransientMdp, policy: Policy) -> np.ndarray:
    """
    The substochastic matrix `Q(y|x,pi(x))` over the effective states.
    """
    if policy.kind is not PolicyKind.DETERMINISTIC:
        raise PolicyError("effective restriction requires a deterministic policy")

    policy.validate(model)
    effective = model.effective
    rows = np.array([model.kernel[x][policy.assignment[x]] for x in effective]).reshape(len(effective), model.n)
    return rows[:, effective]


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array

#!/usr/bin/env python3

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Self, Type, Union

from .internals import ModelValidationError, Violation
from .mdp_core import Policy, TransientMdp, WeightFunction, ensure_valid
from .risk_measures import RiskSpec


@dataclass(frozen=True, slots=True)
class ModelFile:
    """
    ModelFile
    ---------
    A model as stored on disk: the JSON document with the keys `states`,
    `absorbing`, `controls`, `transitions` (`{x, u, y, p}`), `costs`
    (`{x, u, y, c}`) and the optional `weight` (state to weight) and `risk`
    (`{family, kappa|alpha}`).

    ```json
    {
        "states": ["1", "2"],
        "absorbing": "2",
        "controls": {"1": ["a"], "2": ["a"]},
        "transitions": [{"x": "1", "u": "a", "y": "1", "p": 0.5}, ...],
        "costs": [{"x": "1", "u": "a", "y": "1", "c": 1}, ...],
        "risk": {"family": "avar", "alpha": 0.75}
    }
    ```
    """
    model: TransientMdp
    spec: RiskSpec
    weight: WeightFunction

    @classmethod
    def from_dict(cls: Type[Self], document: Mapping[str, Any], risk: Optional[RiskSpec]=None) -> Self:
        """
        Parse and validate a model document. `risk` takes precedence over the
        document's own risk entry.
        """
        if not isinstance(document, Mapping):
            raise ModelValidationError([Violation("model document must be a JSON object")])

        model = ensure_valid(TransientMdp.from_dict(document))
        spec = risk or RiskSpec.from_dict(document.get("risk", {"family": "expectation"}), model.states)

        try:
            weight = WeightFunction.from_names(model, document.get("weight", {}))
        except ValueError as error:
            raise ModelValidationError([Violation(f"invalid weight function: {error}")]) from None

        return cls(model, spec, weight)

    @classmethod
    def load(cls: Type[Self], path: Union[str, Path], risk: Optional[RiskSpec]=None, encoding: str="utf-8") -> Self:
        """
        Read a model file. Malformed JSON is reported as a `ModelValidationError`;
        I/O errors propagate.
        """
        with open(path, mode="r", encoding=encoding) as file_handler:
            try:
                document = json.load(file_handler)
            except json.JSONDecodeError as error:
                raise ModelValidationError([Violation(f"malformed JSON in {Path(path).name}: {error.msg} (line {error.lineno})")]) from None

        return cls.from_dict(document, risk)

    def to_dict(self: Self) -> Dict[str, Any]:
        document = self.model.to_dict()
        document["weight"] = {self.model.states[x]: float(w) for x, w in zip(self.model.effective, self.weight.w)}
        document["risk"] = self.spec.to_dict(self.model.states)
        return document

    def save(self: Self, path: Union[str, Path], encoding: str="utf-8") -> None:
        with open(path, mode="w", encoding=encoding) as file_handler:
            json.dump(self.to_dict(), file_handler, indent=4)


def load_policy(model: TransientMdp, path: Union[str, Path], encoding: str="utf-8") -> Policy:
    """
    Read a policy file mapping state names to a control name or to a
    distribution `{control: probability}`.
    """
    with open(path, mode="r", encoding=encoding) as file_handler:
        try:
            mapping = json.load(file_handler)
        except json.JSONDecodeError as error:
            raise ModelValidationError([Violation(f"malformed JSON in {Path(path).name}: {error.msg} (line {error.lineno})")]) from None

    unknown = [name for name in mapping if name not in model.states]
    if unknown: raise ModelValidationError([Violation("policy references an unknown state", state=name) for name in unknown])

    policy = Policy.from_names(model, mapping)
    policy.validate(model)
    return policy


def load_weight(model: TransientMdp, path: Union[str, Path], encoding: str="utf-8") -> WeightFunction:
    with open(path, mode="r", encoding=encoding) as file_handler:
        return WeightFunction.from_names(model, json.load(file_handler))

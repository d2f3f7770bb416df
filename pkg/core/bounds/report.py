"""
Itemized bound evaluations.

Every theorem's value has the same shape once its parts are laid out per
layer: ||v|| * prod_l (koopman_norm * alpha * kernel_volume * det_factor) / sqrt(S),
with unused parts set to 1.
"""
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Optional, Union

import pandas as pd

from core.base.montecarlo import McEstimate

TheoremTag = Literal["thm1", "thm2", "thm3", "thm4", "cnn"]
THEOREMS = ("thm1", "thm2", "thm3", "thm4", "cnn")


@dataclass(frozen=True)
class AlphaEstimate:
    numerator: McEstimate
    denominator: McEstimate
    ratio: float

    @property
    def stderr(self) -> float:
        """delta-method standard error of sqrt(num/den)"""
        num = float(self.numerator.value)
        den = float(self.denominator.value)
        if num <= 0.0:
            return 0.0
        rel = math.hypot(self.numerator.stderr / num, self.denominator.stderr / den)
        return 0.5 * self.ratio * rel

    def to_json(self) -> dict:
        return {"numerator": self.numerator.to_json(), "denominator": self.denominator.to_json(), "ratio": self.ratio}


@dataclass(frozen=True)
class LayerFactors:
    index: int  # 1-based position in the layer list
    kind: str
    koopman_norm: float = 1.0
    det_factor: float = 1.0
    alpha: Optional[AlphaEstimate] = None
    kernel_volume: float = 1.0
    beta: Optional[float] = None  # |beta_l|

    @property
    def alpha_value(self) -> float:
        return 1.0 if self.alpha is None else self.alpha.ratio

    @property
    def contribution(self) -> float:
        return self.koopman_norm * self.alpha_value * self.kernel_volume * self.det_factor

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "kind": self.kind,
            "koopman_norm": self.koopman_norm,
            "det_factor": self.det_factor,
            "alpha": None if self.alpha is None else self.alpha.to_json(),
            "kernel_volume": self.kernel_volume,
            "beta": self.beta,
        }


def assemble(v_norm: float, per_layer: list[LayerFactors], sample_size: int) -> float:
    product = 1.0
    for layer in per_layer:
        product *= layer.contribution
    return v_norm * product / math.sqrt(sample_size)


@dataclass(frozen=True)
class BoundReport:
    theorem: TheoremTag
    sample_size: int
    per_layer: list[LayerFactors]
    v_norm: float
    value: float
    cap: Optional[float] = None
    seed: Optional[int] = None
    alpha_mode: str = "none"
    notes: list[str] = field(default_factory=list)

    def recompute(self) -> float:
        return assemble(self.v_norm, self.per_layer, self.sample_size)

    @property
    def class_value(self) -> Optional[float]:
        """The bound over the whole cap ball: determinant-type factors replaced by their sup D^L"""
        if self.cap is None:
            return None
        return self.value / math.prod(layer.det_factor for layer in self.per_layer) * self.cap

    def to_json(self) -> dict:
        return {
            "theorem": self.theorem,
            "sample_size": self.sample_size,
            "per_layer": [layer.to_json() for layer in self.per_layer],
            "v_norm": self.v_norm,
            "value": self.value,
            "cap": self.cap,
            "seed": self.seed,
            "alpha_mode": self.alpha_mode,
            "notes": list(self.notes),
        }

    def save(self, path: Union[str, Path]):
        with open(path, "w") as f:
            json.dump(self.to_json(), f, indent=2, sort_keys=True)
            f.write("\n")

    def table(self) -> pd.DataFrame:
        rows = [{
            "layer": layer.index,
            "kind": layer.kind,
            "koopman_norm": layer.koopman_norm,
            "det_factor": layer.det_factor,
            "alpha": layer.alpha_value,
            "kernel_volume": layer.kernel_volume,
            "beta": layer.beta if layer.beta is not None else float("nan"),
        } for layer in self.per_layer]
        return pd.DataFrame(rows, columns=["layer", "kind", "koopman_norm", "det_factor", "alpha", "kernel_volume", "beta"])

    def summary(self) -> str:
        lines = [f"theorem = {self.theorem}, S = {self.sample_size}, ||v|| = {self.v_norm:.6g}"]
        if self.per_layer:
            lines.append(self.table().to_string(index=False))
        if self.cap is not None:
            lines.append(f"cap = {self.cap:.6g}")
        lines.extend(f"note: {note}" for note in self.notes)
        lines.append(f"bound = {self.value:.5g}")
        return "\n".join(lines)

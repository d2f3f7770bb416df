"""
Axis-aligned boxes [a_1,b_1] x ... x [a_d,b_d] used for every input,
pre-activation and post-activation domain.
"""
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from core.base.errors import DimensionError, ParameterError

ArrayLike = Union[Sequence[float], np.ndarray]


@dataclass(frozen=True, eq=False)
class DomainBox:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.array(self.lower, dtype=np.float64).reshape(-1)
        upper = np.array(self.upper, dtype=np.float64).reshape(-1)
        if lower.shape != upper.shape:
            raise DimensionError(f"box bounds have lengths {lower.size} and {upper.size}")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ParameterError("box bounds must be finite")
        if np.any(lower > upper):
            raise ParameterError(f"box lower bound exceeds upper bound: {lower} > {upper}")
        lower.flags.writeable = False
        upper.flags.writeable = False
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def cube(cls, low: float, high: float, dim: int) -> "DomainBox":
        return cls(np.full(dim, float(low)), np.full(dim, float(high)))

    @classmethod
    def symmetric(cls, radius: ArrayLike, dim: int = 0) -> "DomainBox":
        """radius * [-1, 1]^d"""
        radius = np.abs(np.asarray(radius, dtype=np.float64))
        if radius.ndim == 0:
            radius = np.full(dim, float(radius))
        return cls(-radius, radius)

    @property
    def dim(self) -> int:
        return int(self.lower.size)

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    @property
    def volume(self) -> float:
        return float(np.prod(self.widths))

    @property
    def inf_radius(self) -> float:
        """max |x_i| over the box"""
        if self.dim == 0:
            return 0.0
        return float(np.max(np.maximum(np.abs(self.lower), np.abs(self.upper))))

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Exact membership for a point (d,) or a batch (n, d)"""
        points = np.asarray(points)
        inside = (points >= self.lower) & (points <= self.upper)
        return np.all(inside, axis=-1)

    def contains_box(self, other: "DomainBox") -> bool:
        return bool(np.all(other.lower >= self.lower) and np.all(other.upper <= self.upper))

    def hull(self, other: "DomainBox") -> "DomainBox":
        return DomainBox(np.minimum(self.lower, other.lower), np.maximum(self.upper, other.upper))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.lower + self.widths * rng.random((n, self.dim))

    def map(self, fn) -> "DomainBox":
        """Image under an elementwise nondecreasing fn"""
        return DomainBox(fn(self.lower), fn(self.upper))

    def to_json(self) -> dict:
        return {"lower": self.lower.tolist(), "upper": self.upper.tolist()}

    def __eq__(self, other) -> bool:
        if not isinstance(other, DomainBox):
            return NotImplemented
        return bool(np.array_equal(self.lower, other.lower) and np.array_equal(self.upper, other.upper))

    def __repr__(self) -> str:
        return f"DomainBox(lower={self.lower.tolist()}, upper={self.upper.tolist()})"

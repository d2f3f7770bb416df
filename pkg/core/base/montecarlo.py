"""
Monte-Carlo plumbing shared by the network model, the bound engine and the
verification suites: estimates with standard errors, sampling proposals and
seeded configurations.
"""
import math
from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from core.base.domain import DomainBox
from core.base.errors import DegenerateDomainError, ParameterError
from utils.rng import stream, stream_seed

MIN_SAMPLES = 100


@dataclass(frozen=True)
class McEstimate:
    value: Union[float, complex]
    stderr: float
    sample_count: int
    seed: int

    def within(self, target: Union[float, complex], k: float = 3.0, floor: float = 0.0) -> bool:
        """|value - target| <= k * stderr (+ floor)"""
        return abs(self.value - target) <= k * self.stderr + floor

    def scaled(self, factor: float) -> "McEstimate":
        return replace(self, value=self.value * factor, stderr=self.stderr * abs(factor))

    def to_json(self) -> dict:
        value = self.value
        if isinstance(value, complex):
            value_json: Union[float, list] = [value.real, value.imag]
        else:
            value_json = float(value)
        return {"value": value_json, "stderr": self.stderr, "sample_count": self.sample_count, "seed": self.seed}


def mean_estimate(terms: np.ndarray, seed: int, scale: float = 1.0) -> McEstimate:
    """Sample mean of ``terms`` times ``scale`` with its standard error"""
    terms = np.asarray(terms)
    n = terms.shape[0]
    if n < 2:
        raise ParameterError("need at least two samples for a standard error")
    mean = terms.mean()
    if np.iscomplexobj(terms):
        spread = math.sqrt(float(np.var(terms.real, ddof=1) + np.var(terms.imag, ddof=1)))
        value: Union[float, complex] = complex(mean) * scale
    else:
        spread = float(np.std(terms, ddof=1))
        value = float(mean) * scale
    return McEstimate(value=value, stderr=abs(scale) * spread / math.sqrt(n), sample_count=n, seed=seed)


@dataclass(frozen=True, eq=False)
class UniformBoxProposal:
    box: DomainBox

    def __post_init__(self):
        if self.box.volume <= 0.0:
            raise DegenerateDomainError(f"uniform proposal on a zero-volume box {self.box}")

    @property
    def dim(self) -> int:
        return self.box.dim

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.box.sample(rng, n)

    def inverse_density(self, samples: np.ndarray) -> np.ndarray:
        return np.full(samples.shape[0], self.box.volume)


@dataclass(frozen=True, eq=False)
class GaussianProposal:
    """Density proportional to exp(-width * ||y - center||^2)"""
    center: np.ndarray
    width: float

    def __post_init__(self):
        if not self.width > 0.0:
            raise DegenerateDomainError(f"gaussian proposal needs width > 0, got {self.width}")
        object.__setattr__(self, "center", np.asarray(self.center, dtype=np.float64).reshape(-1))

    @property
    def dim(self) -> int:
        return int(self.center.size)

    @property
    def scale(self) -> float:
        """per-coordinate standard deviation"""
        return 1.0 / math.sqrt(2.0 * self.width)

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.center + self.scale * rng.standard_normal((n, self.dim))

    def inverse_density(self, samples: np.ndarray) -> np.ndarray:
        sq = np.sum((samples - self.center) ** 2, axis=1)
        return (math.pi / self.width) ** (self.dim / 2.0) * np.exp(self.width * sq)


Proposal = Union[UniformBoxProposal, GaussianProposal]


@dataclass(frozen=True)
class McConfig:
    sample_count: int
    root_seed: int
    proposal: Proposal

    def __post_init__(self):
        if self.sample_count < MIN_SAMPLES:
            raise ParameterError(f"sample_count must be >= {MIN_SAMPLES}, got {self.sample_count}")

    def rng(self, *names) -> np.random.Generator:
        return stream(self.root_seed, *names)

    def child(self, *names) -> "McConfig":
        """Same counts and proposal on an independent named stream"""
        return replace(self, root_seed=stream_seed(self.root_seed, *names))

    def with_proposal(self, proposal: Proposal) -> "McConfig":
        return replace(self, proposal=proposal)

    def with_samples(self, sample_count: int) -> "McConfig":
        return replace(self, sample_count=sample_count)

    def draw(self, *names) -> tuple[np.ndarray, np.ndarray]:
        """Samples from the proposal and their importance weights 1/q"""
        samples = self.proposal.draw(self.rng(*names), self.sample_count)
        return samples, self.proposal.inverse_density(samples)


def uniform_config(box: DomainBox, sample_count: int, root_seed: int) -> McConfig:
    return McConfig(sample_count=sample_count, root_seed=root_seed, proposal=UniformBoxProposal(box))


def gaussian_config(center, width: float, sample_count: int, root_seed: int) -> McConfig:
    return McConfig(sample_count=sample_count, root_seed=root_seed, proposal=GaussianProposal(np.asarray(center, dtype=np.float64), width))

"""
The Gaussian regularizer p_{c,x} and the regularized model
F_c(x) = <f, p_{c,x}> = integral of f(y) p_{c,x}(y) dy.
"""
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from core.base.errors import ParameterError
from core.base.montecarlo import GaussianProposal, McConfig, McEstimate, mean_estimate
from core.network.forward import forward
from core.network.spec import NetworkSpec

Normalization = Literal["l2_unit", "probability"]


@dataclass(frozen=True, eq=False)
class Regularizer:
    """
    p_{c,x}(y) proportional to exp(-c ||y - x||^2).

    ``l2_unit`` scales the density to unit L2 norm; ``probability`` keeps
    the sqrt(c/pi)^d constant, under which F_c(x) -> f(x) as c grows.
    """
    center: np.ndarray
    width: float
    normalization: Normalization = "l2_unit"

    def __post_init__(self):
        if not self.width > 0.0:
            raise ParameterError(f"regularizer width c must be > 0, got {self.width}")
        if self.normalization not in ("l2_unit", "probability"):
            raise ParameterError(f"unknown normalization {self.normalization!r}")
        object.__setattr__(self, "center", np.asarray(self.center, dtype=np.float64).reshape(-1))

    @property
    def dim(self) -> int:
        return int(self.center.size)

    @property
    def density_l2_norm(self) -> float:
        """L2 norm of the probability density sqrt(c/pi)^d exp(-c||y-x||^2)"""
        return (self.width / (2.0 * math.pi)) ** (self.dim / 4.0)

    @property
    def constant(self) -> float:
        """p = constant * (probability density)"""
        return 1.0 / self.density_l2_norm if self.normalization == "l2_unit" else 1.0

    @property
    def mass(self) -> float:
        """integral of p"""
        return self.constant

    def proposal(self) -> GaussianProposal:
        return GaussianProposal(self.center, self.width)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        sq = np.sum((points - self.center) ** 2, axis=1)
        return self.constant * (self.width / math.pi) ** (self.dim / 2.0) * np.exp(-self.width * sq)


def regularized_forward(spec: NetworkSpec, p: Regularizer, mc: McConfig) -> McEstimate:
    """
    Seeded estimate of F_c with p itself as the importance proposal; the
    importance weight p/q is then the constant ``p.constant``. Only
    ``mc.sample_count`` and ``mc.root_seed`` are used.
    """
    if p.dim != spec.input_dim:
        raise ParameterError(f"regularizer is {p.dim}-d, network input is {spec.input_dim}-d")
    samples = p.proposal().draw(mc.rng("regularized_forward"), mc.sample_count)
    values = forward(spec, samples, check_domain=False)
    return mean_estimate(values, seed=mc.root_seed, scale=p.constant)

"""
Monte-Carlo property tests of the Koopman norm bounds.

||K_sigma h||^2 = integral over X~ of |h(sigma(x))|^2 and ||h||^2 is taken
over sigma(X~). Both integrals use the same uniform draws u in [0, 1]^d,
mapped affinely onto X~ and onto sigma(X~).
"""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from core.activations.catalogue import ActivationSpec, make_activation
from core.activations.koopman import KoopmanNormBound, koopman_norm
from core.base.domain import DomainBox
from core.base.errors import ParameterError
from core.base.montecarlo import McConfig, mean_estimate

# relative slack for bounds that are attained exactly
EXACT_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class GaussianMixture:
    """h(y) = sum_k weight_k exp(-width_k ||y - center_k||^2)"""
    centers: np.ndarray
    widths: np.ndarray
    weights: np.ndarray

    def __call__(self, y: np.ndarray) -> np.ndarray:
        y = np.atleast_2d(y)
        sq = np.sum((y[:, None, :] - self.centers[None, :, :]) ** 2, axis=2)
        return np.exp(-sq * self.widths) @ self.weights


def random_mixture(rng: np.random.Generator, box: DomainBox, max_components: int = 3) -> GaussianMixture:
    """Components centered inside ``box`` with widths on the scale of the box"""
    k = int(rng.integers(1, max_components + 1))
    centers = box.sample(rng, k)
    scale = float(np.max(box.widths)) or 1.0
    widths = rng.uniform(0.5, 20.0, size=k) / scale ** 2
    weights = rng.uniform(-1.0, 1.0, size=k)
    weights[0] = math.copysign(max(abs(weights[0]), 0.25), weights[0])
    return GaussianMixture(centers, widths, weights)


@dataclass(frozen=True)
class NormRatio:
    ratio: float
    stderr: float


def koopman_ratio(activation: ActivationSpec, domain_tilde: DomainBox, h, mc: McConfig, *names) -> NormRatio:
    """||K_sigma h|| / ||h|| with common random numbers"""
    image = activation.image(domain_tilde)
    u = mc.rng("koopman_ratio", *names).random((mc.sample_count, domain_tilde.dim))
    x = domain_tilde.lower + u * domain_tilde.widths
    y = image.lower + u * image.widths
    num = mean_estimate(np.abs(h(activation(x))) ** 2, seed=mc.root_seed, scale=domain_tilde.volume)
    den = mean_estimate(np.abs(h(y)) ** 2, seed=mc.root_seed, scale=image.volume)
    if not den.value > 0.0:
        raise ParameterError("test function vanishes on sigma(X~)")
    ratio = math.sqrt(max(num.value, 0.0) / den.value)
    rel = math.hypot(num.stderr / num.value if num.value > 0 else 0.0, den.stderr / den.value)
    return NormRatio(ratio=ratio, stderr=0.5 * ratio * rel)


@dataclass(frozen=True)
class LemmaCheck:
    bound: float
    ratios: np.ndarray
    stderrs: np.ndarray

    @property
    def worst_excess(self) -> float:
        """max over trials of ratio - 3 stderr - bound"""
        return float(np.max(self.ratios - 3.0 * self.stderrs - self.bound * (1.0 + EXACT_SLACK)))

    @property
    def passed(self) -> bool:
        return self.worst_excess <= 0.0

    @property
    def max_ratio(self) -> float:
        return float(np.max(self.ratios))


def koopman_lemma_check(activation: ActivationSpec, domain_tilde: DomainBox, bound: Optional[KoopmanNormBound],
                        trials: int, mc: McConfig) -> LemmaCheck:
    """Random Gaussian-mixture h, one ratio per trial, each against the certified bound"""
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    bound = bound or koopman_norm(activation, domain_tilde)
    image = activation.image(domain_tilde)
    ratios = np.empty(trials)
    stderrs = np.empty(trials)
    for t in range(trials):
        h = random_mixture(mc.rng("lemma", "h", t), image)
        r = koopman_ratio(activation, domain_tilde, h, mc, t)
        ratios[t] = r.ratio
        stderrs[t] = r.stderr
    return LemmaCheck(bound=bound.value, ratios=ratios, stderrs=stderrs)


def leaky_relu_witness(slope: float, dim: int, mc: McConfig) -> NormRatio:
    """
    On X~ = [-1, 0]^d the leaky ReLU is x -> a x, so any h gives the ratio
    a^{-d/2}; the witness h is concentrated in the negative orthant.
    """
    activation = make_activation("leaky_relu", {"slope": slope})
    box = DomainBox.cube(-1.0, 0.0, dim)
    h = GaussianMixture(centers=np.full((1, dim), -0.5 * slope), widths=np.array([4.0 / slope ** 2]), weights=np.ones(1))
    return koopman_ratio(activation, box, h, mc, "witness")


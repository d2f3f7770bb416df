"""
alpha(h) = ( int_{W X_{l-1}} |h|^2 dmu_{R(W)} / int_{X~_l} |h|^2 )^{1/2}

The numerator is pulled back onto X_{l-1}: for injective W,
int_{W X} |h|^2 dmu_R = |det W*W|^{1/2} vol(X) E_{x ~ U(X)} |h(W x + b)|^2.
"""
import math
from typing import Callable, Optional

import numpy as np

from core.base.domain import DomainBox
from core.base.errors import DegenerateDomainError, DimensionError, InjectivityError
from core.base.montecarlo import McConfig, mean_estimate
from core.bounds.report import AlphaEstimate
from core.linalg.svd import as_matrix, svd

Evaluable = Callable[[np.ndarray], np.ndarray]


def estimate_alpha(
    h: Evaluable,
    w,
    prev_domain: DomainBox,
    domain_tilde: DomainBox,
    mc: McConfig,
    bias: Optional[np.ndarray] = None,
) -> AlphaEstimate:
    """
    Monte-Carlo alpha factor of one layer.

    Only ``mc.sample_count`` and ``mc.root_seed`` are used: the numerator
    samples X_{l-1} uniformly, the denominator samples X~_l uniformly, each
    on its own named stream.
    """
    w = as_matrix(w)
    if w.shape[1] != prev_domain.dim or w.shape[0] != domain_tilde.dim:
        raise DimensionError(f"matrix {w.shape} between a {prev_domain.dim}-d and a {domain_tilde.dim}-d box")
    result = svd(w)
    if result.numerical_rank < w.shape[1]:
        raise InjectivityError(f"alpha needs an injective matrix, got rank {result.numerical_rank} for shape {w.shape}")
    offset = np.zeros(w.shape[0]) if bias is None else np.asarray(bias, dtype=np.float64)

    jacobian = float(np.prod(result.singular_values[: w.shape[1]]))
    x = prev_domain.sample(mc.rng("alpha", "numerator"), mc.sample_count)
    numerator = mean_estimate(np.abs(h(x @ w.T + offset)) ** 2, seed=mc.root_seed,
                              scale=jacobian * prev_domain.volume)

    if domain_tilde.volume <= 0.0:
        raise DegenerateDomainError("alpha denominator over a zero-volume box")
    y = domain_tilde.sample(mc.rng("alpha", "denominator"), mc.sample_count)
    denominator = mean_estimate(np.abs(h(y)) ** 2, seed=mc.root_seed, scale=domain_tilde.volume)
    if not float(denominator.value) > 0.0:
        raise DegenerateDomainError(f"alpha denominator estimate is {float(denominator.value):.3g}, h vanishes on X~")

    ratio = math.sqrt(max(float(numerator.value), 0.0) / float(denominator.value))
    return AlphaEstimate(numerator=numerator, denominator=denominator, ratio=ratio)

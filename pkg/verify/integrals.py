"""
Importance-sampled L2 integrals.
"""
import math
import warnings
from typing import Callable

import numpy as np

from core.base.errors import KoopboundWarning
from core.base.montecarlo import McConfig, McEstimate, mean_estimate

Evaluable = Callable[[np.ndarray], np.ndarray]

# negligible integrand magnitude and the tolerated share of such samples
SUPPORT_FLOOR = 1e-12
COVERAGE_SHARE = 0.01


def check_coverage(*values: np.ndarray, where: str = "integral"):
    """Warn when too many samples land where every integrand is negligible"""
    dead = np.ones(values[0].shape[0], dtype=bool)
    for v in values:
        dead &= np.abs(v) < SUPPORT_FLOOR
    share = float(np.mean(dead))
    if share > COVERAGE_SHARE:
        warnings.warn(f"{where}: {share:.1%} of the samples fall outside the integrands' support, "
                      "the proposal does not match them", KoopboundWarning, stacklevel=3)


def l2_inner(f: Evaluable, g: Evaluable, mc: McConfig, stream: str = "l2_inner") -> McEstimate:
    """Estimate of the integral of f * conj(g)"""
    samples, weights = mc.draw(stream)
    fv = f(samples)
    gv = g(samples)
    check_coverage(fv, gv, where="l2_inner")
    return mean_estimate(fv * np.conj(gv) * weights, seed=mc.root_seed)


def l2_norm_sq(f: Evaluable, mc: McConfig, stream: str = "l2_norm") -> McEstimate:
    samples, weights = mc.draw(stream)
    fv = f(samples)
    check_coverage(fv, where="l2_norm_sq")
    return mean_estimate(np.abs(fv) ** 2 * weights, seed=mc.root_seed)


def gaussian_overlap(x, y, width: float) -> float:
    """<p_{c,x}, p_{c,y}> for unit-L2 Gaussians: exp(-c ||x - y||^2 / 2)"""
    diff = np.asarray(x, dtype=np.float64) - np.asarray(y, dtype=np.float64)
    return math.exp(-0.5 * width * float(np.dot(diff, diff)))

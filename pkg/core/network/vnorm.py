import math
from typing import Optional

import numpy as np

from core.base.domain import DomainBox
from core.base.errors import ModeViolationError
from core.base.montecarlo import McConfig, mean_estimate, uniform_config
from core.network.spec import FinalTransform

V_NORM_SAMPLES = 200_000
MODE_CHECK_SAMPLES = 4096


def _mc_norm(final: FinalTransform, box: DomainBox, mc: Optional[McConfig]) -> float:
    mc = mc or uniform_config(box, V_NORM_SAMPLES, 0)
    samples = box.sample(mc.rng("v_norm"), mc.sample_count)
    estimate = mean_estimate(np.abs(final(samples)) ** 2, seed=mc.root_seed, scale=box.volume)
    return math.sqrt(max(float(estimate.value), 0.0))


def v_norm(final: FinalTransform, last_domain: DomainBox, mc: Optional[McConfig] = None) -> float:
    """||v|| in L2, exact where a closed form exists"""
    if final.norm_mode == "measure_bound":
        rng = (mc.rng("v_norm_mode_check") if mc is not None else np.random.default_rng(0))
        samples = last_domain.sample(rng, MODE_CHECK_SAMPLES)
        peak = float(np.max(np.abs(final(samples))))
        if peak > 1.0:
            raise ModeViolationError(f"measure_bound needs |v| <= 1, found |v| = {peak:.6g}")
        return math.sqrt(last_domain.volume)
    if final.kind == "gaussian_bump":
        # over all of R^d: (integral of e^{-2|x|^2})^{1/2} = (pi/2)^{d/4}
        return abs(final.w3) * (math.pi / 2.0) ** (last_domain.dim / 4.0)
    if final.kind == "coordinate":
        lo = last_domain.lower[final.index]
        hi = last_domain.upper[final.index]
        width = hi - lo
        others = last_domain.volume / width if width > 0 else float(np.prod(np.delete(last_domain.widths, final.index)))
        return math.sqrt(others * (hi ** 3 - lo ** 3) / 3.0)
    return _mc_norm(final, last_domain, mc)

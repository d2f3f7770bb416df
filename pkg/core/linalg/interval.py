"""
Interval images of boxes under affine maps.
"""
from typing import Optional

import numpy as np

from core.base.domain import DomainBox
from core.base.errors import DimensionError
from core.linalg.svd import as_matrix

_EPS = np.finfo(np.float64).eps


def interval_affine_image(w, b: Optional[np.ndarray], box: DomainBox) -> DomainBox:
    """
    Enclosure of {w x + b : x in box}.

    Output interval i is [sum_j min(w_ij a_j, w_ij b_j) + b_i, sum_j max(...) + b_i],
    pushed outward by a rounding allowance so that floating-point w @ x + b
    never escapes it.
    """
    w = as_matrix(w)
    if np.iscomplexobj(w):
        raise DimensionError("interval images are defined for real matrices only")
    if w.shape[1] != box.dim:
        raise DimensionError(f"matrix with {w.shape[1]} columns applied to a {box.dim}-d box")
    bias = np.zeros(w.shape[0]) if b is None else np.asarray(b, dtype=np.float64).reshape(-1)
    if bias.size != w.shape[0]:
        raise DimensionError(f"bias of length {bias.size} for a matrix with {w.shape[0]} rows")

    at_lower = w * box.lower
    at_upper = w * box.upper
    low = np.minimum(at_lower, at_upper).sum(axis=1) + bias
    high = np.maximum(at_lower, at_upper).sum(axis=1) + bias

    magnitude = np.maximum(np.abs(at_lower), np.abs(at_upper)).sum(axis=1) + np.abs(bias)
    slack = (w.shape[1] + 2) * _EPS * magnitude
    return DomainBox(low - slack, high + slack)


def widen(box: DomainBox, relative: float = 4 * _EPS) -> DomainBox:
    """Outward rounding allowance for images of elementwise functions"""
    pad = relative * np.maximum(np.abs(box.lower), np.abs(box.upper)) + np.finfo(np.float64).tiny
    return DomainBox(box.lower - pad, box.upper + pad)

__all__ = [
    "BoundReport", "LayerFactors", "AlphaEstimate", "estimate_alpha",
    "bound_thm1", "thm1_for_spec", "bound_thm2", "bound_thm3", "bound_thm4", "bound_cnn",
    "evaluate_bound", "kernel_volume", "coefficient_box", "default_mc",
    "regularizer_values", "synthetic_r", "dense_r123", "lenet_r123", "tradeoff_profile",
]

from .report import BoundReport, LayerFactors, AlphaEstimate
from .alpha import estimate_alpha
from .theorems import (
    bound_thm1, thm1_for_spec, bound_thm2, bound_thm3, bound_thm4, bound_cnn,
    evaluate_bound, kernel_volume, coefficient_box, default_mc,
)
from .regularizers import regularizer_values, synthetic_r, dense_r123, lenet_r123
from .tradeoff import tradeoff_profile

__all__ = [
    "svd", "SvdResult", "as_matrix", "spectral_norm", "RANK_TOL",
    "det_factor_invertible", "det_factor_injective", "det_factor_restricted", "RestrictedDeterminant",
    "circulant_spectrum", "dft_scaling", "literal_scaling", "beta", "log_abs_beta",
    "convolution_matrix", "pool_matrix", "pool_groups",
    "interval_affine_image", "widen",
]

from .svd import svd, SvdResult, as_matrix, spectral_norm, RANK_TOL
from .determinants import det_factor_invertible, det_factor_injective, det_factor_restricted, RestrictedDeterminant
from .circulant import (
    circulant_spectrum, dft_scaling, literal_scaling, beta, log_abs_beta,
    convolution_matrix, pool_matrix, pool_groups,
)
from .interval import interval_affine_image, widen

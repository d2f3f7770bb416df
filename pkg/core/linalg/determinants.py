"""
Determinant-type factors of the bounds, all taken through singular values so
that complex and rectangular matrices share one code path.
"""
from dataclasses import dataclass

import numpy as np

from core.base.errors import DimensionError, InfiniteFactorError, InjectivityError
from core.linalg.svd import svd, as_matrix, SvdResult

# smallest |det| treated as nonzero
_UNDERFLOW_FLOOR = np.finfo(np.float64).tiny


@dataclass(frozen=True, eq=False)
class RestrictedDeterminant:
    factor: float
    kernel_basis: np.ndarray
    rank: int


def _log_abs_det(result: SvdResult, count: int) -> float:
    return float(np.sum(np.log(result.singular_values[:count])))


def det_factor_invertible(w) -> float:
    """|det w|^{-1/2} for square w"""
    w = as_matrix(w)
    if w.shape[0] != w.shape[1]:
        raise DimensionError(f"det_factor_invertible needs a square matrix, got {w.shape}")
    result = svd(w)
    n = w.shape[0]
    if result.numerical_rank < n:
        raise InfiniteFactorError(f"matrix has numerical rank {result.numerical_rank} < {n}, |det W|^{{-1/2}} is infinite")
    log_det = _log_abs_det(result, n)
    if log_det < np.log(_UNDERFLOW_FLOOR):
        raise InfiniteFactorError(f"|det W| = exp({log_det:.3g}) underflows, factor is infinite")
    return float(np.exp(-0.5 * log_det))


def det_factor_injective(w) -> float:
    """|det(w* w)|^{-1/4} = prod s_i^{-1/2} for w with full column rank"""
    w = as_matrix(w)
    result = svd(w)
    cols = w.shape[1]
    if result.numerical_rank < cols:
        raise InjectivityError(
            f"matrix of shape {w.shape} has numerical rank {result.numerical_rank} < {cols}; "
            "use the restricted-determinant bound (thm4)"
        )
    return float(np.exp(-0.5 * _log_abs_det(result, cols)))


def det_factor_restricted(w) -> RestrictedDeterminant:
    """prod of nonzero singular values^{-1/2} (1 for the zero matrix) and an orthonormal basis of ker(w)"""
    result = svd(as_matrix(w))
    rank = result.numerical_rank
    factor = float(np.exp(-0.5 * _log_abs_det(result, rank))) if rank else 1.0
    return RestrictedDeterminant(factor=factor, kernel_basis=result.kernel_basis, rank=rank)

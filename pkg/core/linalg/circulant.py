"""
Circular convolution on a finite index set I = J_1 x ... x J_d: spectra,
dense convolution matrices and square average-pooling matrices.
"""
from typing import Optional, Sequence

import numpy as np

from core.base.errors import ParameterError, DimensionError


def dft_scaling(shape: Sequence[int]) -> np.ndarray:
    """diag(2pi/|J_i|): gamma_m are the eigenvalues of the convolution matrix"""
    return np.array([2.0 * np.pi / n for n in shape], dtype=np.float64)


def literal_scaling(shape: Sequence[int]) -> np.ndarray:
    """diag(1/(2pi|J_i|)) as printed alongside the CNN bound"""
    return np.array([1.0 / (2.0 * np.pi * n) for n in shape], dtype=np.float64)


def _index_grid(shape: Sequence[int]) -> np.ndarray:
    """All multi-indices of I in row-major order, shape (|I|, d)"""
    axes = [np.arange(n) for n in shape]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(shape))


def circulant_spectrum(theta, scaling: Optional[np.ndarray] = None) -> np.ndarray:
    """
    gamma_m(theta) = sum_{j in I} theta_j exp(i (S j) . m) for every m in I.

    Args:
        theta: kernel array whose shape is the index set
        scaling: diagonal of S, defaults to dft_scaling(theta.shape)

    Returns:
        complex array with the shape of theta
    """
    theta = np.asarray(theta)
    if theta.size == 0 or theta.ndim == 0:
        raise ParameterError("circulant_spectrum needs a non-empty index set")
    shape = theta.shape
    if scaling is None:
        # same sum, evaluated by FFT
        return np.fft.ifftn(theta) * theta.size
    scaling = np.asarray(scaling, dtype=np.float64).reshape(-1)
    if scaling.size != len(shape):
        raise DimensionError(f"scaling has {scaling.size} entries for a {len(shape)}-d index set")
    grid = _index_grid(shape)
    phases = (grid * scaling) @ grid.T
    gamma = np.exp(1j * phases).T @ theta.reshape(-1).astype(np.complex128)
    return gamma.reshape(shape)


def log_abs_beta(theta, scaling: Optional[np.ndarray] = None) -> float:
    """log |prod_m gamma_m|, -inf if some gamma_m vanishes"""
    gamma = np.abs(circulant_spectrum(theta, scaling))
    with np.errstate(divide="ignore"):
        return float(np.sum(np.log(gamma)))


def beta(theta, scaling: Optional[np.ndarray] = None) -> complex:
    return complex(np.prod(circulant_spectrum(theta, scaling)))


def convolution_matrix(theta) -> np.ndarray:
    """Dense C with (C x)_m = sum_j theta_j x_{(m - j) mod n}, rows/cols in row-major order of I"""
    theta = np.asarray(theta)
    if theta.size == 0:
        raise ParameterError("convolution_matrix needs a non-empty index set")
    shape = np.array(theta.shape)
    grid = _index_grid(theta.shape)
    diff = (grid[:, None, :] - grid[None, :, :]) % shape
    return theta[tuple(diff[..., axis] for axis in range(len(shape)))]


def pool_groups(shape: Sequence[int], window: Sequence[int]) -> np.ndarray:
    """Pool-group id for every index of I (row-major)"""
    shape = tuple(int(n) for n in shape)
    window = tuple(int(w) for w in window)
    if len(window) != len(shape):
        raise DimensionError(f"pool window {window} does not match index set {shape}")
    if any(w < 1 or n % w for n, w in zip(shape, window)):
        raise ParameterError(f"pool window {window} must divide index set {shape}")
    grid = _index_grid(shape) // np.array(window)
    blocks = [n // w for n, w in zip(shape, window)]
    return np.ravel_multi_index(tuple(grid.T), blocks)


def pool_matrix(shape: Sequence[int], window: Sequence[int]) -> np.ndarray:
    """Square upsampled-average matrix: (P)_{ij} = 1/m when i, j share a pool group"""
    groups = pool_groups(shape, window)
    m = int(np.prod(window))
    return (groups[:, None] == groups[None, :]).astype(np.float64) / m

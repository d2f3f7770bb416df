"""
Datasets for the two training experiments.
"""
from dataclasses import dataclass

import numpy as np
from sklearn.datasets import load_digits
from sklearn.model_selection import train_test_split

from core.base.domain import DomainBox
from core.base.errors import ParameterError
from utils.rng import stream, stream_seed

SYNTHETIC_DIM = 3
DIGIT_CLASSES = 10


@dataclass(frozen=True, eq=False)
class Dataset:
    x_train: np.ndarray
    y_train: np.ndarray
    x_test: np.ndarray
    y_test: np.ndarray
    # box the inputs are drawn from (X_0 of the network)
    input_domain: DomainBox

    @property
    def input_dim(self) -> int:
        return self.x_train.shape[1]

    @property
    def train_size(self) -> int:
        return self.x_train.shape[0]


def synthetic_target(x: np.ndarray) -> np.ndarray:
    """t(x) = exp(-||2x - 1||^2)"""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    return np.exp(-np.sum((2.0 * x - 1.0) ** 2, axis=1))


def build_synthetic_task(data_seed: int, train_size: int = 1000, test_size: int = 1000) -> Dataset:
    """(x, t(x)) pairs with x uniform on [-1, 1]^3"""
    if train_size < 1 or test_size < 1:
        raise ParameterError(f"dataset sizes must be positive, got {train_size}, {test_size}")
    box = DomainBox.cube(-1.0, 1.0, SYNTHETIC_DIM)
    x_train = box.sample(stream(data_seed, "synthetic", "train"), train_size)
    x_test = box.sample(stream(data_seed, "synthetic", "test"), test_size)
    return Dataset(x_train, synthetic_target(x_train), x_test, synthetic_target(x_test), box)


def build_digits_task(data_seed: int, train_size: int = 1000, test_size: int = 797) -> Dataset:
    """
    8x8 handwritten digits scaled to [0, 1], stratified train/test split.

    The test set is whatever remains after the split, capped at ``test_size``.
    """
    digits = load_digits()
    x = digits.data.astype(np.float64) / 16.0
    y = digits.target.astype(np.int64)
    if not 1 <= train_size < x.shape[0]:
        raise ParameterError(f"train_size must lie in 1..{x.shape[0] - 1}, got {train_size}")
    # stratification needs every class on both sides
    classes = np.unique(y).size
    stratify = y if min(train_size, x.shape[0] - train_size) >= classes else None
    x_train, x_test, y_train, y_test = train_test_split(
        x, y, train_size=train_size, stratify=stratify,
        random_state=stream_seed(data_seed, "digits", "split") % (2 ** 32),
    )
    return Dataset(x_train, y_train, x_test[:test_size], y_test[:test_size], DomainBox.cube(0.0, 1.0, x.shape[1]))

"""
Epoch logs of a training run and their CSV plot data (17 significant digits).
"""
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Union

import pandas as pd

from core.base.errors import ConfigError, ParameterError

FLOAT_FORMAT = "%.17g"
COLUMNS = ["epoch", "train_loss", "test_loss", "gap", "regularizer", "bound"]


@dataclass(frozen=True)
class EpochRow:
    epoch: int
    train_loss: float
    test_loss: float
    gap: float
    regularizer: float
    bound: float
    test_accuracy: Optional[float] = None

    @property
    def finite(self) -> bool:
        # the bound column may legitimately be NaN or inf
        values = [self.train_loss, self.test_loss, self.gap, self.regularizer]
        if self.test_accuracy is not None:
            values.append(self.test_accuracy)
        return all(math.isfinite(v) for v in values)


@dataclass
class TrainLog:
    experiment: str
    regularizer_weight: float
    rows: list[EpochRow] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def append(self, row: EpochRow):
        if self.rows and row.epoch <= self.rows[-1].epoch:
            raise ParameterError(f"epoch {row.epoch} after epoch {self.rows[-1].epoch}")
        self.rows.append(row)

    @property
    def final(self) -> EpochRow:
        return self.rows[-1]

    def column(self, name: str) -> list[float]:
        return [getattr(row, name) for row in self.rows]

    @property
    def has_accuracy(self) -> bool:
        return any(row.test_accuracy is not None for row in self.rows)

    def to_frame(self) -> pd.DataFrame:
        columns = COLUMNS + (["test_accuracy"] if self.has_accuracy else [])
        return pd.DataFrame([asdict(row) for row in self.rows], columns=columns)


def emit_plot_data(log: TrainLog, path: Union[str, Path]) -> Path:
    if len(log) == 0:
        raise ParameterError("cannot emit plot data for an empty log")
    path = Path(path)
    try:
        os.makedirs(path.parent, exist_ok=True)
        log.to_frame().to_csv(path, index=False, float_format=FLOAT_FORMAT)
    except OSError as e:
        raise ConfigError(f"cannot write plot data to {path}: {e}") from e
    return path


def read_plot_data(path: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")

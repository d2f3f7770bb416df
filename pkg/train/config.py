"""
Training configuration, read from the ``train:`` section of a YAML document.
"""
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Literal, Optional, Union

from core.base.config import build_dataclass, read_yaml
from core.base.errors import ConfigError

Experiment = Literal["synthetic_regression", "dense_classifier"]


@dataclass
class SGDConfig:
    lr: float = 0.001


@dataclass
class AdamConfig:
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


OptimizerConfig = Union[SGDConfig, AdamConfig]


@dataclass
class TrainConfig:
    experiment: Experiment = "synthetic_regression"
    sample_size: int = 1000
    test_size: int = 1000
    epochs: int = 200
    batch_size: int = 50
    optimizer: OptimizerConfig = field(default_factory=SGDConfig)
    regularizer_weight: float = 0.1
    data_seed: int = 0
    init_seed: int = 0
    # dense_classifier only: hidden widths, input and class count come from the data
    widths: list[int] = field(default_factory=lambda: [64, 128, 128])
    alpha: float = 0.1
    mu: float = 0.5

    def __post_init__(self):
        if self.experiment not in ("synthetic_regression", "dense_classifier"):
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.sample_size < 1:
            raise ConfigError(f"sample_size must be at least 1, got {self.sample_size}")
        if self.test_size < 1:
            raise ConfigError(f"test_size must be at least 1, got {self.test_size}")
        if self.epochs < 0:
            raise ConfigError(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be at least 1, got {self.batch_size}")
        if not self.regularizer_weight >= 0.0:
            raise ConfigError(f"regularizer_weight must be >= 0, got {self.regularizer_weight}")
        if len(self.widths) != 3 or any(w < 1 for w in self.widths):
            raise ConfigError(f"widths must list three hidden widths, got {self.widths}")

    @property
    def optimizer_kind(self) -> str:
        return "adam" if isinstance(self.optimizer, AdamConfig) else "sgd"

    def for_run(self, run: int) -> "TrainConfig":
        """Copy whose data and init streams are offset by the run index"""
        return replace(self, data_seed=self.data_seed + run, init_seed=self.init_seed + run)

    def control(self) -> "TrainConfig":
        return replace(self, regularizer_weight=0.0)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TrainConfig":
        data = dict(data)
        # 根据 kind 字段选择优化器配置类
        if "optimizer" in data:
            optimizer = data["optimizer"]
            if not isinstance(optimizer, dict):
                raise ConfigError(f"optimizer must be a mapping, got {optimizer!r}")
            optimizer = dict(optimizer)
            kind = optimizer.pop("kind", "sgd")
            if kind == "sgd":
                data["optimizer"] = build_dataclass(SGDConfig, optimizer, where="sgd optimizer")
            elif kind == "adam":
                data["optimizer"] = build_dataclass(AdamConfig, optimizer, where="adam optimizer")
            else:
                raise ConfigError(f"unsupported optimizer kind {kind!r}, expected sgd or adam")
        elif data.get("experiment") == "dense_classifier":
            data["optimizer"] = AdamConfig()
        return build_dataclass(cls, data, where="train config")

    @classmethod
    def from_yaml(cls, path: Union[str, Path], overrides: Optional[dict[str, Any]] = None) -> "TrainConfig":
        document = read_yaml(path)
        section = document.get("train")
        if not isinstance(section, dict):
            raise ConfigError(f"{path}: missing train: section")
        section = dict(section)
        for key, value in (overrides or {}).items():
            # nested overrides (optimizer.lr) merge into the file mapping
            if isinstance(value, dict) and isinstance(section.get(key), dict):
                section[key] = {**section[key], **value}
            else:
                section[key] = value
        return cls.from_dict(section)

"""
File-level schema of network spec documents (YAML).

These dataclasses mirror the document one to one; ``core.network.loader``
turns them into the immutable runtime ``NetworkSpec``.
"""
import os
import yaml
from typing import Any, Optional, Union
from dataclasses import dataclass, field
from pathlib import Path
from dacite import from_dict, Config, DaciteError

from core.base.errors import ConfigError

# YAML writes 1 for 1.0; float fields accept ints
DACITE_CONFIG = Config(strict=True, check_types=True, type_hooks={float: float})


def read_yaml(path: Union[str, Path]) -> dict[str, Any]:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, "r") as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"cannot parse {path}: {e}") from e
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def build_dataclass(cls, data: dict[str, Any], where: str = ""):
    """dacite.from_dict with strict key and type checks, errors mapped to ConfigError"""
    try:
        return from_dict(data_class=cls, data=data, config=DACITE_CONFIG)
    except (DaciteError, TypeError, ValueError) as e:
        raise ConfigError(f"invalid {where or cls.__name__}: {e}") from e


@dataclass
class BoxFile:
    lower: list[float]
    upper: list[float]


@dataclass
class ActivationFile:
    kind: str
    params: dict[str, float] = field(default_factory=dict)


@dataclass
class WeightsRef:
    # KBW1 sidecar, relative to the spec file
    file: str


@dataclass
class ConvFile:
    index_set: list[int]
    theta: list[float]  # row-major over the index set
    scaling: str = "dft"  # dft | literal


@dataclass
class HeisenbergFile:
    a: list[float]
    b: list[float]
    c: float = 0.0


@dataclass
class LayerFile:
    kind: str
    weights: Optional[Union[list[list[float]], WeightsRef]] = None
    bias: Optional[list[float]] = None
    activation: Optional[ActivationFile] = None
    pool_size: Optional[int] = None
    pool_window: Optional[list[int]] = None
    pool_index_set: Optional[list[int]] = None
    conv: Optional[ConvFile] = None
    group: Optional[HeisenbergFile] = None
    domain_tilde: Optional[BoxFile] = None
    domain: Optional[BoxFile] = None


@dataclass
class FinalFile:
    kind: str
    w3: float = 1.0
    norm_mode: str = "exact"
    target_class: int = 0
    index: int = 0
    table: Optional[list[float]] = None
    table_shape: Optional[list[int]] = None
    grid: Optional[BoxFile] = None


@dataclass
class NetworkFile:
    model_flavor: str
    input_domain: BoxFile
    layers: list[LayerFile]
    final: FinalFile
    domain_mode: str = "tight"
    # read by train.config.TrainConfig
    train: Optional[dict[str, Any]] = None

    @classmethod
    def from_yaml(cls, path: Union[str, Path]) -> "NetworkFile":
        return build_dataclass(cls, read_yaml(path), where=f"network spec {path}")

"""
测试 YAML 配置加载: 网络描述文件、训练配置与命令行覆盖项
"""
from pathlib import Path

import pytest

from cli.commands import parse_overrides
from core.base.config import BoxFile, LayerFile, NetworkFile, WeightsRef, build_dataclass, read_yaml
from core.base.errors import ConfigError
from train.config import AdamConfig, SGDConfig, TrainConfig

ROOT = Path(__file__).parent.parent
CONFIGS = ROOT / "configs"


@pytest.mark.parametrize("name", ["toy_orthogonal_tanh.yaml", "singular_dense.yaml", "affine_kernel.yaml", "cnn_pool.yaml"])
def test_network_files_parse(name):
    document = NetworkFile.from_yaml(CONFIGS / name)
    assert document.layers
    assert len(document.input_domain.lower) == len(document.input_domain.upper)
    assert document.train is None


def test_cnn_file_layers():
    document = NetworkFile.from_yaml(CONFIGS / "cnn_pool.yaml")
    assert document.model_flavor == "cnn"
    assert [layer.kind for layer in document.layers] == ["conv", "pool", "conv"]
    assert document.layers[0].conv.scaling == "dft"
    assert document.layers[1].pool_size == 2


def test_int_literals_accepted_as_floats():
    box = build_dataclass(BoxFile, {"lower": [-1, 0], "upper": [1, 2]})
    assert box.lower == [-1.0, 0.0]
    assert all(isinstance(v, float) for v in box.upper)


def test_weights_inline_or_sidecar():
    inline = build_dataclass(LayerFile, {"kind": "dense", "weights": [[1, 0], [0, 1]]})
    assert inline.weights == [[1.0, 0.0], [0.0, 1.0]]
    sidecar = build_dataclass(LayerFile, {"kind": "dense", "weights": {"file": "w1.kbw"}})
    assert sidecar.weights == WeightsRef(file="w1.kbw")


def test_strict_keys_and_types():
    with pytest.raises(ConfigError, match="BoxFile"):
        build_dataclass(BoxFile, {"lower": [0.0], "upper": [1.0], "middle": [0.5]})
    with pytest.raises(ConfigError):
        build_dataclass(BoxFile, {"lower": "zero", "upper": [1.0]})
    with pytest.raises(ConfigError):
        build_dataclass(LayerFile, {"weights": [[1.0]]})


def test_read_yaml_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        read_yaml(tmp_path / "missing.yaml")
    broken = tmp_path / "broken.yaml"
    broken.write_text("layers: [unclosed\n")
    with pytest.raises(ConfigError, match="cannot parse"):
        read_yaml(broken)
    listing = tmp_path / "list.yaml"
    listing.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError, match="mapping"):
        read_yaml(listing)
    empty = tmp_path / "empty.yaml"
    empty.write_text("")
    assert read_yaml(empty) == {}


def test_train_configs():
    synthetic = TrainConfig.from_yaml(CONFIGS / "synthetic_train.yaml")
    assert synthetic.experiment == "synthetic_regression"
    assert synthetic.optimizer == SGDConfig(lr=0.001)
    assert (synthetic.sample_size, synthetic.test_size, synthetic.epochs) == (1000, 1000, 200)
    assert synthetic.regularizer_weight == 0.1

    dense = TrainConfig.from_yaml(CONFIGS / "dense_train.yaml")
    assert isinstance(dense.optimizer, AdamConfig)
    assert dense.test_size == 797
    assert dense.epochs == 30


def test_train_overrides_nest():
    config = TrainConfig.from_yaml(CONFIGS / "synthetic_train.yaml", {"optimizer": {"kind": "sgd", "lr": 0.5}})
    assert config.optimizer.lr == 0.5


def test_parse_overrides():
    overrides = parse_overrides(["epochs=0", "optimizer.lr=0.01", "optimizer.kind=adam", "experiment=dense_classifier"])
    assert overrides == {"epochs": 0, "optimizer": {"lr": 0.01, "kind": "adam"}, "experiment": "dense_classifier"}
    assert parse_overrides([]) == {}
    with pytest.raises(ConfigError):
        parse_overrides(["epochs"])
    with pytest.raises(ConfigError):
        parse_overrides(["epochs=1", "epochs.inner=2"])


def test_dotted_override_keeps_optimizer_kind():
    config = TrainConfig.from_yaml(CONFIGS / "dense_train.yaml", parse_overrides(["optimizer.lr=0.01"]))
    assert isinstance(config.optimizer, AdamConfig)
    assert config.optimizer.lr == 0.01

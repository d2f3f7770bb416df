"""
测试训练任务、模型正则项、训练循环与批量运行
"""
import math
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from core.base.domain import DomainBox
from core.base.errors import ConfigError, DivergenceError, KoopboundWarning, ParameterError
from core.bounds import synthetic_r
from train import (
    AdamConfig,
    DenseClassifier,
    EpochRow,
    SGDConfig,
    SyntheticModel,
    TrainConfig,
    TrainLog,
    build_digits_task,
    build_synthetic_task,
    check_regularizer_trend,
    emit_plot_data,
    grad_check,
    orthogonal,
    read_plot_data,
    run_batch,
    run_dense_classifier,
    run_path,
    run_synthetic,
    spearman,
    synthetic_target,
    train,
)
from train import autodiff as ad
from utils.rng import stream

ROOT = Path(__file__).parent.parent
CUBE = DomainBox.cube(-1.0, 1.0, 3)


def _small(**changes) -> TrainConfig:
    return replace(TrainConfig(sample_size=100, test_size=50, epochs=2), **changes)


def test_synthetic_target():
    assert synthetic_target(np.full(3, 0.5))[0] == pytest.approx(1.0)
    assert synthetic_target(np.zeros(3))[0] == pytest.approx(math.exp(-3.0))


def test_synthetic_task_is_deterministic():
    a = build_synthetic_task(3, 20, 10)
    b = build_synthetic_task(3, 20, 10)
    assert np.array_equal(a.x_train, b.x_train)
    assert np.array_equal(a.y_test, b.y_test)
    assert a.input_dim == 3
    assert np.all(CUBE.contains(a.x_train))
    assert not np.array_equal(a.x_train, build_synthetic_task(4, 20, 10).x_train)


def test_digits_task():
    data = build_digits_task(0, 1000, 797)
    assert data.x_train.shape == (1000, 64)
    assert data.x_test.shape == (797, 64)
    assert data.x_train.min() >= 0.0 and data.x_train.max() <= 1.0
    assert set(np.unique(data.y_train)) == set(range(10))
    with pytest.raises(ParameterError):
        build_digits_task(0, 0)


def test_orthogonal_init():
    tall = orthogonal(stream(0, "o"), 6, 3)
    wide = orthogonal(stream(0, "o"), 3, 6)
    assert np.allclose(tall.T @ tall, np.eye(3))
    assert np.allclose(wide @ wide.T, np.eye(3))


def test_synthetic_regularizer_matches_bound_module():
    model = SyntheticModel.initialize(0, CUBE)
    assert float(model.w3.data) == 1.0
    # orthonormal weights: the determinant factors are 1
    r = float(model.regularizer().data)
    assert r == pytest.approx(synthetic_r(model.to_spec())["r"], rel=1e-9)
    assert synthetic_r(model.to_spec())["det_term"] == pytest.approx(1.0, rel=1e-9)

    model.w1.data = model.w1.data * 0.7
    model.w3.data = np.asarray(-1.3)
    assert float(model.regularizer().data) == pytest.approx(synthetic_r(model.to_spec())["r"], rel=1e-9)


def test_dense_regularizer_at_init():
    model = DenseClassifier.initialize(0, DomainBox.cube(0.0, 1.0, 64), [64, 128, 128])
    terms = {name: float(t.data) for name, t in model.regularizer_terms().items()}
    assert terms["r2"] == pytest.approx(1.0, rel=1e-9)
    assert terms["r3"] == pytest.approx(2.0, rel=1e-9)
    assert terms["r1"] > 2.0
    assert [w.shape for w in model.weights] == [(64, 64), (128, 64), (128, 128), (10, 128)]


def test_dense_activation_and_slope():
    model = DenseClassifier.initialize(0, DomainBox.cube(0.0, 1.0, 4), [4, 4, 4], classes=3)
    x = np.array([-40.0, 0.0, 40.0])
    expected = 0.1 * x + 0.9 * 0.5 * (np.logaddexp(0.0, x / 0.5) - math.log(2.0))
    np.testing.assert_allclose(model.activation(ad.as_tensor(x)).data, expected, rtol=1e-10, atol=1e-12)
    slopes = model.slope(ad.as_tensor(x)).data
    assert slopes[0] == pytest.approx(0.1, rel=1e-6)
    assert slopes[1] == pytest.approx(0.55)
    assert slopes[2] == pytest.approx(1.0, rel=1e-6)


def test_synthetic_grad_check():
    data = build_synthetic_task(0, 40, 10)
    model = SyntheticModel.initialize(1, CUBE)
    error = grad_check(model.params, lambda: model.objective(data.x_train, data.y_train, 0.1))
    assert error <= 1e-4


def test_dense_grad_check():
    data = build_digits_task(0, 60, 20)
    box = DomainBox.cube(0.0, 1.0, 64)
    model = DenseClassifier.initialize(2, box, [64, 64, 16])
    error = grad_check(model.params, lambda: model.objective(data.x_train, data.y_train, 0.01), exclude=("W1", "W2"))
    assert error <= 1e-4

    # off the orthogonal init every parameter is differentiable
    rng = stream(5, "perturb")
    for p in model.params:
        p.data = p.data + 0.01 * rng.standard_normal(p.data.shape)
    error = grad_check(model.params, lambda: model.objective(data.x_train, data.y_train, 0.01))
    assert error <= 1e-4


def test_objective_is_linear_in_weight():
    data = build_synthetic_task(0, 30, 10)
    model = SyntheticModel.initialize(0, CUBE)
    base = float(model.objective(data.x_train, data.y_train, 0.0).data)
    one = float(model.objective(data.x_train, data.y_train, 0.1).data)
    two = float(model.objective(data.x_train, data.y_train, 0.2).data)
    assert two - base == pytest.approx(2.0 * (one - base), rel=1e-9)


def test_config_defaults_and_validation():
    config = TrainConfig()
    assert config.optimizer_kind == "sgd"
    assert config.optimizer.lr == 0.001
    assert TrainConfig.from_dict({"experiment": "dense_classifier"}).optimizer_kind == "adam"
    assert config.for_run(3).init_seed == 3
    assert config.control().regularizer_weight == 0.0
    with pytest.raises(ConfigError):
        TrainConfig(batch_size=0)
    with pytest.raises(ConfigError):
        TrainConfig(widths=[64, 128])
    with pytest.raises(ConfigError):
        TrainConfig.from_dict({"optimizer": {"kind": "rmsprop"}})
    with pytest.raises(ConfigError):
        TrainConfig.from_dict({"epochz": 3})


def test_config_from_yaml():
    config = TrainConfig.from_yaml(ROOT / "configs" / "dense_train.yaml", {"epochs": 3})
    assert config.experiment == "dense_classifier"
    assert isinstance(config.optimizer, AdamConfig)
    assert config.epochs == 3
    assert config.regularizer_weight == 0.01
    synthetic = TrainConfig.from_yaml(ROOT / "configs" / "synthetic_train.yaml")
    assert isinstance(synthetic.optimizer, SGDConfig)
    with pytest.raises(ConfigError):
        TrainConfig.from_yaml(ROOT / "configs" / "toy_orthogonal_tanh.yaml")


def test_training_is_deterministic(tmp_path):
    config = _small()
    first = run_synthetic(config, tmp_path / "a.csv")
    second = run_synthetic(config, tmp_path / "b.csv")
    assert first.column("train_loss") == second.column("train_loss")
    assert first.column("regularizer") == second.column("regularizer")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert [row.epoch for row in first.rows] == [0, 1, 2]


def test_zero_epochs_writes_initial_row(tmp_path):
    path = tmp_path / "zero.csv"
    train_log = run_synthetic(_small(epochs=0), path)
    assert len(train_log) == 1
    assert len(path.read_text().strip().splitlines()) == 2
    frame = read_plot_data(path)
    assert list(frame.columns) == ["epoch", "train_loss", "test_loss", "gap", "regularizer", "bound"]
    assert frame["regularizer"][0] == train_log.rows[0].regularizer


def test_control_arm_skips_regularizer_gradient():
    data = build_synthetic_task(0, 100, 20)
    control = train(_small(regularizer_weight=0.0), data)
    regularized = train(_small(regularizer_weight=0.5), data)
    assert control.rows[0].train_loss == regularized.rows[0].train_loss
    assert control.rows[0].regularizer == regularized.rows[0].regularizer
    assert control.final.regularizer != regularized.final.regularizer


def test_divergence_flushes_log(tmp_path):
    path = tmp_path / "diverged.csv"
    config = _small(optimizer=SGDConfig(lr=float("inf")))
    with pytest.raises(DivergenceError) as info:
        run_synthetic(config, path)
    assert len(info.value.log) == 1
    assert len(path.read_text().strip().splitlines()) == 2


def test_plot_data_errors(tmp_path):
    with pytest.raises(ParameterError):
        emit_plot_data(TrainLog("synthetic_regression", 0.1), tmp_path / "empty.csv")
    blocker = tmp_path / "file"
    blocker.write_text("x")
    train_log = TrainLog("synthetic_regression", 0.1, [EpochRow(0, 1.0, 1.0, 0.0, 1.0, 1.0)])
    with pytest.raises(ConfigError):
        emit_plot_data(train_log, blocker / "sub" / "log.csv")
    with pytest.raises(ParameterError):
        train_log.append(EpochRow(0, 1.0, 1.0, 0.0, 1.0, 1.0))


def test_regularizer_trend_warning():
    rows = [EpochRow(k, 1.0, 1.0, 0.0, r, 1.0) for k, r in enumerate([3.0, 2.0, 1.0, 1.5])]
    with pytest.warns(KoopboundWarning):
        assert not check_regularizer_trend(TrainLog("synthetic_regression", 0.1, rows))
    falling = [EpochRow(k, 1.0, 1.0, 0.0, r, 1.0) for k, r in enumerate([3.0, 2.0, 1.0, 0.5])]
    assert check_regularizer_trend(TrainLog("synthetic_regression", 0.1, falling))


def test_spearman():
    rows = [EpochRow(k, 1.0, 1.0 + k, float(k), 10.0 - k, 1.0) for k in range(5)]
    assert spearman(TrainLog("synthetic_regression", 0.1, rows)) == pytest.approx(-1.0)
    flat = [EpochRow(k, 1.0, 1.0, 0.0, 1.0, 1.0) for k in range(3)]
    assert math.isnan(spearman(TrainLog("synthetic_regression", 0.1, flat)))


def test_run_paths():
    assert run_path("out/synthetic_regression", 2) == Path("out/synthetic_regression_2.csv")
    assert run_path("out/dense_classifier", 0, "control") == Path("out/dense_classifier_control_0.csv")


def test_run_batch(tmp_path):
    result = run_batch(_small(epochs=1), 2, tmp_path / "synthetic", max_workers=1)
    assert [path.name for path in result.paths] == ["synthetic_0.csv", "synthetic_1.csv"]
    assert all(path.exists() for path in result.paths)
    assert len(result.correlations) == 2
    # the run index offsets the data seed
    assert result.logs[0].rows[0].train_loss != result.logs[1].rows[0].train_loss
    with pytest.raises(ParameterError):
        run_batch(_small(), 0)


def test_dense_classifier_arms(tmp_path):
    config = TrainConfig(experiment="dense_classifier", sample_size=100, test_size=50, epochs=1,
                         optimizer=AdamConfig(), regularizer_weight=0.01, widths=[64, 64, 16])
    comparison = run_dense_classifier(config, tmp_path / "reg.csv", tmp_path / "control.csv")
    assert comparison.control.regularizer_weight == 0.0
    assert comparison.regularized.has_accuracy
    assert "test_accuracy" in read_plot_data(tmp_path / "control.csv").columns
    assert -1.0 <= comparison.accuracy_difference <= 1.0
    with pytest.raises(ParameterError):
        run_dense_classifier(_small())


@pytest.mark.slow
def test_synthetic_default_run_learns():
    train_log = run_synthetic(TrainConfig.from_yaml(ROOT / "configs" / "synthetic_train.yaml"))
    assert train_log.final.train_loss < train_log.rows[0].train_loss


@pytest.mark.slow
def test_synthetic_gap_tracks_regularizer():
    # data and init seeds 0, 1, 2
    config = TrainConfig.from_yaml(ROOT / "configs" / "synthetic_train.yaml")
    correlations = [spearman(run_synthetic(config.for_run(run))) for run in range(3)]
    assert sum(rho >= 0.5 for rho in correlations) >= 2, correlations


@pytest.mark.slow
def test_dense_regularizer_falls_and_keeps_accuracy():
    # data and init seeds 0, 1, 2
    config = TrainConfig.from_yaml(ROOT / "configs" / "dense_train.yaml")
    differences = []
    for run in range(3):
        comparison = run_dense_classifier(config.for_run(run))
        regularized = comparison.regularized
        assert regularized.final.regularizer < regularized.rows[0].regularizer, f"run {run}"
        differences.append(comparison.accuracy_difference)
    assert np.mean(differences) >= -0.01

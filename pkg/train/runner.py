"""
Training loops of the two experiments, batch runs and gradient checks.
"""
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.stats import spearmanr

from core.base.errors import DivergenceError, KoopboundWarning, ParameterError
from train.autodiff import Tensor
from train.config import AdamConfig, TrainConfig
from train.models import DenseClassifier, Model, SyntheticModel, build_model
from train.optim import SGD, Adam, Optimizer
from train.plot_data import EpochRow, TrainLog, emit_plot_data
from train.tasks import Dataset, build_digits_task, build_synthetic_task
from utils.common import debug_print, log
from utils.parallel import ordered_map
from utils.rng import stream

# soft check tolerance on the regularizer trend
TREND_RTOL = 1e-9


def build_dataset(config: TrainConfig) -> Dataset:
    if config.experiment == "synthetic_regression":
        return build_synthetic_task(config.data_seed, config.sample_size, config.test_size)
    return build_digits_task(config.data_seed, config.sample_size, config.test_size)


def make_optimizer(config: TrainConfig, model: Model) -> Optimizer:
    settings = config.optimizer
    if isinstance(settings, AdamConfig):
        return Adam(model.params, settings.lr, settings.beta1, settings.beta2, settings.eps)
    return SGD(model.params, settings.lr)


def evaluate_epoch(model: Model, data: Dataset, epoch: int) -> EpochRow:
    train_loss = float(model.data_loss(data.x_train, data.y_train).data)
    test_loss = float(model.data_loss(data.x_test, data.y_test).data)
    accuracy = model.accuracy(data.x_test, data.y_test) if isinstance(model, DenseClassifier) else None
    return EpochRow(
        epoch=epoch,
        train_loss=train_loss,
        test_loss=test_loss,
        gap=test_loss - train_loss,
        regularizer=float(model.regularizer().data),
        bound=model.bound_value(data.train_size),
        test_accuracy=accuracy,
    )


def _diverged(train_log: TrainLog, epoch: int, log_path: Optional[Union[str, Path]]):
    if log_path is not None and len(train_log):
        emit_plot_data(train_log, log_path)
    raise DivergenceError(f"{train_log.experiment}: non-finite values at epoch {epoch}", log=train_log)


def _record(train_log: TrainLog, row: EpochRow, log_path: Optional[Union[str, Path]]):
    if not row.finite:
        _diverged(train_log, row.epoch, log_path)
    train_log.append(row)


def train(config: TrainConfig, data: Dataset, log_path: Optional[Union[str, Path]] = None) -> TrainLog:
    """
    Minibatch training of the configured experiment.

    Epoch 0 is the state at initialization; each later row follows one
    pass over the shuffled training set.
    """
    model = build_model(config, data.input_domain)
    optimizer = make_optimizer(config, model)
    train_log = TrainLog(config.experiment, config.regularizer_weight)
    _record(train_log, evaluate_epoch(model, data, 0), log_path)
    order_rng = stream(config.data_seed, "train", "shuffle")
    n = data.train_size
    for epoch in range(1, config.epochs + 1):
        order = order_rng.permutation(n)
        for start in range(0, n, config.batch_size):
            batch = order[start:start + config.batch_size]
            optimizer.zero_grad()
            loss = model.objective(data.x_train[batch], data.y_train[batch], config.regularizer_weight)
            if not np.isfinite(loss.data):
                _diverged(train_log, epoch, log_path)
            loss.backward()
            optimizer.step()
        row = evaluate_epoch(model, data, epoch)
        _record(train_log, row, log_path)
        debug_print(f"{config.experiment} epoch {epoch}: train {row.train_loss:.6g} test {row.test_loss:.6g} "
                    f"reg {row.regularizer:.6g}")
    if log_path is not None:
        emit_plot_data(train_log, log_path)
    return train_log


def check_regularizer_trend(train_log: TrainLog) -> bool:
    """Soft check: the regularizer does not increase over the last half of the epochs"""
    values = np.asarray(train_log.column("regularizer"))
    tail = values[len(values) // 2:]
    steps = np.diff(tail)
    ok = bool(np.all(steps <= TREND_RTOL * np.abs(tail[:-1]))) if steps.size else True
    if not ok:
        warnings.warn(f"{train_log.experiment}: regularizer increased over the last half of training",
                      KoopboundWarning, stacklevel=2)
    return ok


def run_synthetic(config: TrainConfig, log_path: Optional[Union[str, Path]] = None) -> TrainLog:
    if config.experiment != "synthetic_regression":
        raise ParameterError(f"run_synthetic needs experiment synthetic_regression, got {config.experiment}")
    train_log = train(config, build_dataset(config), log_path)
    if config.regularizer_weight > 0.0 and config.epochs > 1:
        check_regularizer_trend(train_log)
    return train_log


@dataclass
class DenseComparison:
    regularized: TrainLog
    control: TrainLog

    @property
    def accuracy_difference(self) -> float:
        """final test accuracy of the regularized arm minus the control arm"""
        return float(self.regularized.final.test_accuracy - self.control.final.test_accuracy)


def run_dense_classifier(config: TrainConfig, log_path: Optional[Union[str, Path]] = None,
                         control_path: Optional[Union[str, Path]] = None) -> DenseComparison:
    """Regularized arm and the lambda = 0 control arm under identical seeds"""
    if config.experiment != "dense_classifier":
        raise ParameterError(f"run_dense_classifier needs experiment dense_classifier, got {config.experiment}")
    data = build_dataset(config)
    regularized = train(config, data, log_path)
    control = train(config.control(), data, control_path)
    return DenseComparison(regularized, control)


def spearman(train_log: TrainLog) -> float:
    """Rank correlation of the generalization gap and the regularizer over epochs"""
    gap = train_log.column("gap")
    reg = train_log.column("regularizer")
    if len(gap) < 2 or np.ptp(gap) == 0.0 or np.ptp(reg) == 0.0:
        return float("nan")
    return float(spearmanr(gap, reg).correlation)


@dataclass
class BatchResult:
    config: TrainConfig
    logs: list[Union[TrainLog, DenseComparison]]
    paths: list[Path] = field(default_factory=list)
    correlations: list[float] = field(default_factory=list)


def run_path(prefix: Union[str, Path], run: int, arm: str = "") -> Path:
    prefix = Path(prefix)
    suffix = f"_{arm}" if arm else ""
    return prefix.with_name(f"{prefix.name}{suffix}_{run}.csv")


def _run_one(job: tuple[TrainConfig, int, Optional[str]]) -> Union[TrainLog, DenseComparison]:
    config, run, prefix = job
    run_config = config.for_run(run)
    if config.experiment == "synthetic_regression":
        return run_synthetic(run_config, None if prefix is None else run_path(prefix, run))
    return run_dense_classifier(run_config, None if prefix is None else run_path(prefix, run),
                                None if prefix is None else run_path(prefix, run, "control"))


def run_batch(config: TrainConfig, runs: int, prefix: Optional[Union[str, Path]] = None,
              max_workers: Optional[int] = None) -> BatchResult:
    """
    ``runs`` independent runs, the run index offsetting data and init seeds.
    Files are ``<prefix>_<k>.csv`` (and ``<prefix>_control_<k>.csv`` for the
    dense classifier).
    """
    if runs < 1:
        raise ParameterError(f"runs must be at least 1, got {runs}")
    log(f"{config.experiment}: {runs} run(s) of {config.epochs} epochs")
    jobs = [(config, k, None if prefix is None else str(prefix)) for k in range(runs)]
    logs = ordered_map(_run_one, jobs, max_workers=max_workers)
    result = BatchResult(config=config, logs=logs)
    if prefix is not None:
        for k in range(runs):
            result.paths.append(run_path(prefix, k))
            if config.experiment == "dense_classifier":
                result.paths.append(run_path(prefix, k, "control"))
    if config.experiment == "synthetic_regression":
        result.correlations = [spearman(train_log) for train_log in logs]
    return result


def grad_check(params: Sequence[Tensor], loss_fn: Callable[[], Tensor], h: float = 1e-5, per_param: int = 8,
               seed: int = 0, exclude: Sequence[str] = (), floor: float = 1e-6) -> float:
    """
    Max relative error between reverse-mode and central-difference gradients.

    Up to ``per_param`` coordinates of every parameter (except those named in
    ``exclude``) are checked; the error is |a - n| / max(|a|, |n|, floor).
    """
    for p in params:
        p.zero_grad()
    loss_fn().backward()
    worst = 0.0
    for p in params:
        if p.name in exclude:
            continue
        analytic = np.zeros_like(p.data) if p.grad is None else p.grad.copy()
        rng = stream(seed, "grad_check", p.name)
        count = min(per_param, p.data.size)
        picks = rng.choice(p.data.size, size=count, replace=False)
        for flat in picks:
            original = p.data.copy()
            shifted = original.copy()
            shifted.flat[flat] += h
            p.data = shifted
            plus = float(loss_fn().data)
            shifted = original.copy()
            shifted.flat[flat] -= h
            p.data = shifted
            minus = float(loss_fn().data)
            p.data = original
            numeric = (plus - minus) / (2.0 * h)
            a = float(analytic.flat[flat])
            error = abs(a - numeric) / max(abs(a), abs(numeric), floor)
            worst = max(worst, error)
    return worst

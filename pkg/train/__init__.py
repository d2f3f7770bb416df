from train.autodiff import Tensor, parameter
from train.config import AdamConfig, SGDConfig, TrainConfig
from train.optim import SGD, Adam, Optimizer
from train.tasks import Dataset, build_digits_task, build_synthetic_task, synthetic_target
from train.models import DenseClassifier, Model, SyntheticModel, build_model, orthogonal, truncated_normal
from train.plot_data import EpochRow, TrainLog, emit_plot_data, read_plot_data
from train.runner import (
    BatchResult,
    DenseComparison,
    check_regularizer_trend,
    grad_check,
    run_batch,
    run_dense_classifier,
    run_path,
    run_synthetic,
    spearman,
    train,
)

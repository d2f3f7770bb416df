"""
Trainable models of the two experiments, with their bound-derived regularizers
written in autodiff operations so the regularizer can be differentiated.

Synthetic regression:  f(x) = w3 exp(-||W2 tanh(W1 x)||^2),  W1 3x3, W2 6x3
    r = |w3| prod_i cosh^2(sum_j |W1_ij|) |det W1*W1|^{-1/4} |det W2*W2|^{-1/4}
Dense classifier:      logits = W4 s(W3 s(W2 s(W1 x + b1) + b2) + b3) + b4
    s the smooth leaky ReLU, regularizer r1 + r2 + r3 on the first two layers
"""
import math
from typing import Optional

import numpy as np
from scipy.stats import truncnorm

from core.activations.catalogue import make_activation
from core.base.domain import DomainBox
from core.base.errors import KoopboundError
from core.bounds.theorems import bound_thm3
from core.network.spec import FinalTransform, NetworkSpec, dense_layer
from train import autodiff as ad
from train.autodiff import Tensor, parameter
from train.config import TrainConfig
from train.tasks import DIGIT_CLASSES
from utils.rng import stream

TRUNCNORM_STDDEV = 0.05
_LOG2 = math.log(2.0)


def orthogonal(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """Matrix with orthonormal columns (rows >= cols) or rows, via QR of a Gaussian matrix"""
    tall = rows >= cols
    a = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    # sign fix makes the distribution uniform (Haar)
    q = q * np.where(np.diag(r) < 0.0, -1.0, 1.0)
    return q if tall else q.T


def truncated_normal(rng: np.random.Generator, rows: int, cols: int, stddev: float = TRUNCNORM_STDDEV) -> np.ndarray:
    """Normal(0, stddev) truncated at two standard deviations"""
    return truncnorm.rvs(-2.0, 2.0, loc=0.0, scale=stddev, size=(rows, cols), random_state=rng)


class Model:
    params: list[Tensor]

    def named_params(self) -> dict[str, Tensor]:
        return {p.name: p for p in self.params}

    def forward(self, x: np.ndarray) -> Tensor:
        raise NotImplementedError

    def data_loss(self, x: np.ndarray, y: np.ndarray) -> Tensor:
        raise NotImplementedError

    def regularizer(self) -> Tensor:
        raise NotImplementedError

    def objective(self, x: np.ndarray, y: np.ndarray, weight: float) -> Tensor:
        loss = self.data_loss(x, y)
        if weight == 0.0:
            return loss
        return loss + self.regularizer() * weight

    def bound_value(self, sample_size: int) -> float:
        raise NotImplementedError


class SyntheticModel(Model):
    """Biases are fixed at zero; W1, W2 and w3 are trained"""

    def __init__(self, w1: np.ndarray, w2: np.ndarray, w3: float, input_domain: DomainBox):
        self.w1 = parameter(w1, "W1")
        self.w2 = parameter(w2, "W2")
        self.w3 = parameter(w3, "w3")
        self.params = [self.w1, self.w2, self.w3]
        self.input_domain = input_domain

    @classmethod
    def initialize(cls, init_seed: int, input_domain: DomainBox, hidden: int = 3, output: int = 6) -> "SyntheticModel":
        w1 = orthogonal(stream(init_seed, "init", "W1"), hidden, input_domain.dim)
        w2 = orthogonal(stream(init_seed, "init", "W2"), output, hidden)
        return cls(w1, w2, 1.0, input_domain)

    def forward(self, x: np.ndarray) -> Tensor:
        hidden = ad.tanh(ad.matmul(x, self.w1.T))
        z = ad.matmul(hidden, self.w2.T)
        return self.w3 * ad.exp(-(z * z).sum(axis=1))

    def data_loss(self, x: np.ndarray, y: np.ndarray) -> Tensor:
        residual = self.forward(x) - y
        return (residual * residual).mean()

    def log_regularizer(self) -> Tensor:
        # tight image of [-1, 1]^d under W1 has radius sum_j |W1_ij| in coordinate i
        reach = ad.absolute(self.w1).sum(axis=1) * self.input_domain.inf_radius
        sup_term = ad.logcosh(reach).sum() * 2.0
        det_term = (ad.log_gram_det(self.w1) + ad.log_gram_det(self.w2)) * -0.25
        return ad.log(ad.absolute(self.w3)) + sup_term + det_term

    def regularizer(self) -> Tensor:
        return ad.exp(self.log_regularizer())

    def to_spec(self) -> NetworkSpec:
        layers = (dense_layer(self.w1.data, activation=make_activation("tanh")), dense_layer(self.w2.data))
        final = FinalTransform(kind="gaussian_bump", w3=float(self.w3.data))
        return NetworkSpec(self.input_domain, layers, final, model_flavor="plain", domain_mode="tight")

    def bound_value(self, sample_size: int) -> float:
        try:
            return bound_thm3(self.to_spec(), sample_size, alpha_mode="conservative").value
        except KoopboundError:
            return float("nan")


class DenseClassifier(Model):
    def __init__(self, weights: list[np.ndarray], biases: list[np.ndarray], input_domain: DomainBox,
                 alpha: float = 0.1, mu: float = 0.5):
        self.weights = [parameter(w, f"W{k}") for k, w in enumerate(weights, start=1)]
        self.biases = [parameter(b, f"b{k}") for k, b in enumerate(biases, start=1)]
        self.params = [p for pair in zip(self.weights, self.biases) for p in pair]
        self.input_domain = input_domain
        self.alpha = alpha
        self.mu = mu

    @classmethod
    def initialize(cls, init_seed: int, input_domain: DomainBox, widths: list[int], classes: int = DIGIT_CLASSES,
                   alpha: float = 0.1, mu: float = 0.5) -> "DenseClassifier":
        """Orthogonal init for the first two layers, truncated normal for the last two, zero biases"""
        sizes = [input_domain.dim, *widths, classes]
        weights = []
        for k in range(len(sizes) - 1):
            rng = stream(init_seed, "init", f"W{k + 1}")
            if k < 2:
                weights.append(orthogonal(rng, sizes[k + 1], sizes[k]))
            else:
                weights.append(truncated_normal(rng, sizes[k + 1], sizes[k]))
        biases = [np.zeros(n) for n in sizes[1:]]
        return cls(weights, biases, input_domain, alpha, mu)

    def activation(self, x: Tensor) -> Tensor:
        """alpha x + (1 - alpha) mu (softplus(x / mu) - log 2)"""
        return x * self.alpha + (ad.softplus(x * (1.0 / self.mu)) - _LOG2) * ((1.0 - self.alpha) * self.mu)

    def slope(self, x: Tensor) -> Tensor:
        return ad.sigmoid(x * (1.0 / self.mu)) * (1.0 - self.alpha) + self.alpha

    def forward(self, x: np.ndarray) -> Tensor:
        h: Tensor = ad.as_tensor(x)
        last = len(self.weights) - 1
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = ad.matmul(h, w.T) + b
            if k < last:
                h = self.activation(h)
        return h

    def data_loss(self, x: np.ndarray, y: np.ndarray) -> Tensor:
        return ad.cross_entropy(self.forward(x), y)

    def accuracy(self, x: np.ndarray, y: np.ndarray) -> float:
        logits = self.forward(x).data
        return float(np.mean(np.argmax(logits, axis=1) == y))

    def radii(self) -> list[Tensor]:
        """
        Pre-activation radii R_l of the first two layers under the norm recipe:
        R_l = ||W_l|| rho_{l-1} + ||b_l||_inf, rho_0 the radius of X_0 and
        rho_l = s(R_l) the radius of the activation image.
        """
        rho: Tensor = ad.as_tensor(self.input_domain.inf_radius)
        radii = []
        for w, b in zip(self.weights[:2], self.biases[:2]):
            radius = ad.spectral_norm(w) * rho + ad.inf_norm(b)
            radii.append(radius)
            rho = self.activation(radius)
        return radii

    def regularizer_terms(self) -> dict[str, Tensor]:
        first_two = self.weights[:2]
        r1 = sum((1.0 / self.slope(-radius) for radius in self.radii()), start=ad.as_tensor(0.0))
        r2 = sum((1.0 / (ad.exp(ad.log_gram_det(w) * 0.25) + 1.0) for w in first_two), start=ad.as_tensor(0.0))
        r3 = sum((ad.spectral_norm(w) for w in first_two), start=ad.as_tensor(0.0))
        return {"r1": r1, "r2": r2, "r3": r3}

    def regularizer(self) -> Tensor:
        terms = self.regularizer_terms()
        return terms["r1"] + terms["r2"] + terms["r3"]

    def to_spec(self) -> NetworkSpec:
        activation = make_activation("smooth_leaky_relu", {"alpha": self.alpha, "mu": self.mu})
        last = len(self.weights) - 1
        layers = tuple(dense_layer(w.data, b.data, activation if k < last else None)
                       for k, (w, b) in enumerate(zip(self.weights, self.biases)))
        final = FinalTransform(kind="softmax", norm_mode="measure_bound")
        return NetworkSpec(self.input_domain, layers, final, model_flavor="plain", domain_mode="paper_recipe")

    def bound_value(self, sample_size: int) -> float:
        """
        Injective-prefix factor of the bound over the first two layers:
        prod_l (1/s'(-R_l))^{d_l/2} |det W_l*W_l|^{-1/4} / sqrt(S), taken in log space.
        """
        log_value = -0.5 * math.log(sample_size)
        for radius, w in zip(self.radii(), self.weights[:2]):
            log_value += -0.5 * w.shape[0] * math.log(float(self.slope(-radius).data))
            log_value += -0.25 * float(ad.log_gram_det(w).data)
        return math.exp(log_value) if log_value < 700.0 else float("inf")


def build_model(config: TrainConfig, input_domain: DomainBox, classes: Optional[int] = None) -> Model:
    if config.experiment == "synthetic_regression":
        return SyntheticModel.initialize(config.init_seed, input_domain)
    return DenseClassifier.initialize(config.init_seed, input_domain, config.widths,
                                      classes or DIGIT_CLASSES, config.alpha, config.mu)

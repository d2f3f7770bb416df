"""
Certified bounds on the Koopman operator norm ||K_sigma h|| / ||h|| of
elementwise activations over a pre-activation box X~.

For an elementwise increasing sigma the inverse Jacobian is diagonal, so
sup |J sigma^{-1}| over sigma(X~) factorizes into per-coordinate suprema.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from core.activations.catalogue import ActivationSpec
from core.base.domain import DomainBox
from core.base.errors import ParameterError, UnsupportedActivationError

GRID_DENSITY = 4096


@dataclass(frozen=True, eq=False)
class KoopmanNormBound:
    value: float
    per_dimension_sup: np.ndarray
    domain_used: Optional[DomainBox]
    # pre-activation coordinate where each per-dimension sup is attained
    argmax_points: Optional[np.ndarray] = None

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise ParameterError(f"Koopman norm bound is not finite: {self.value}")

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "per_dimension_sup": np.asarray(self.per_dimension_sup).tolist(),
            "domain_used": self.domain_used.to_json() if self.domain_used is not None else None,
        }


def _from_sups(sups: np.ndarray, box: Optional[DomainBox], points: Optional[np.ndarray] = None) -> KoopmanNormBound:
    sups = np.asarray(sups, dtype=np.float64)
    value = float(np.sqrt(np.prod(sups)))
    return KoopmanNormBound(value=value, per_dimension_sup=sups, domain_used=box, argmax_points=points)


def _larger_endpoint(box: DomainBox) -> np.ndarray:
    """Endpoint of larger magnitude in each coordinate"""
    return np.where(np.abs(box.upper) >= np.abs(box.lower), box.upper, box.lower)


def koopman_norm_tanh(domain_tilde: DomainBox) -> KoopmanNormBound:
    # 1/(1 - tanh(t)^2) = cosh(t)^2, increasing in |t|
    t = _larger_endpoint(domain_tilde)
    return _from_sups(np.cosh(t) ** 2, domain_tilde, t)


def koopman_norm_sigmoid(domain_tilde: DomainBox) -> KoopmanNormBound:
    # 1/(s - s^2) at s = sigmoid(t) equals 2 + 2 cosh(t), increasing in |t|
    t = _larger_endpoint(domain_tilde)
    return _from_sups(2.0 + 2.0 * np.cosh(t), domain_tilde, t)


def koopman_norm_leaky_relu(slope: float, d: int) -> KoopmanNormBound:
    """max{1, 1/a^d}^{1/2}, independent of the domain"""
    if not slope > 0.0:
        raise ParameterError(f"leaky_relu slope must be > 0, got {slope}")
    return _from_sups(np.full(d, max(1.0, 1.0 / slope)), None)


def koopman_norm_generic(activation: ActivationSpec, domain_tilde: DomainBox, grid_density: int = GRID_DENSITY) -> KoopmanNormBound:
    """
    Numeric sup of |J sigma^{-1}|^{1/2} over sigma(domain_tilde).

    Each coordinate is scanned on a grid of ``grid_density`` points of its
    image interval; the interval endpoints are evaluated exactly as well.
    """
    if not activation.elementwise or activation.kind not in ("tanh", "sigmoid", "leaky_relu", "smooth_leaky_relu", "identity"):
        raise UnsupportedActivationError(f"activation {activation.kind!r} has no invertible elementwise form")
    if grid_density < 2:
        raise ParameterError("grid_density must be at least 2")
    sups = np.empty(domain_tilde.dim)
    points = np.empty(domain_tilde.dim)
    fraction = np.linspace(0.0, 1.0, grid_density)
    for i in range(domain_tilde.dim):
        pre = domain_tilde.lower[i] + fraction * (domain_tilde.upper[i] - domain_tilde.lower[i])
        image = activation(pre)
        values = activation.inverse_derivative(image)
        best = int(np.argmax(values))
        sups[i] = values[best]
        points[i] = pre[best]
    return _from_sups(sups, domain_tilde, points)


def koopman_norm(activation: ActivationSpec, domain_tilde: DomainBox) -> KoopmanNormBound:
    """Closed-form bound where one exists, the grid bound otherwise"""
    if activation.kind == "tanh":
        return koopman_norm_tanh(domain_tilde)
    if activation.kind == "sigmoid":
        return koopman_norm_sigmoid(domain_tilde)
    if activation.kind == "leaky_relu":
        return koopman_norm_leaky_relu(activation.slope, domain_tilde.dim)
    if activation.kind == "identity":
        return _from_sups(np.ones(domain_tilde.dim), domain_tilde)
    return koopman_norm_generic(activation, domain_tilde)


def shift_koopman_norm() -> float:
    """Translations preserve the L2 norm, so bias layers contribute a factor of 1"""
    return 1.0

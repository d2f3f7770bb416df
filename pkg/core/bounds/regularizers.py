"""
Bound-derived regularization terms, evaluated on a NetworkSpec.

synthetic_r  r = |w3| sup_{x in tanh(X~_1)} prod 1/(1 - x_i^2) |det W_1*W_1|^{-1/4} |det W_2*W_2|^{-1/4}
dense_r123   r1 = sum_{l=1,2} sup 1/sigma'(X~_l),  r2 = sum_{l=1,2} 1/(1 + |det W_l*W_l|^{1/4}),
             r3 = ||W_1|| + ||W_2||
lenet_r123   r1 = sum_l sup_{x in X_l} 1/(2 - x^2),  r2 = sum_l 1/(0.01 + s_min(W_l)),  r3 = ||W_L||
"""
from typing import Literal

import numpy as np

from core.activations.koopman import koopman_norm, koopman_norm_tanh
from core.base.errors import ApplicabilityError
from core.linalg.determinants import det_factor_injective
from core.linalg.svd import svd
from core.network.domains import propagate_domains
from core.network.spec import LayerSpec, NetworkSpec

RegularizerMode = Literal["synthetic_r", "dense_r123", "lenet_r123"]
MODES = ("synthetic_r", "dense_r123", "lenet_r123")


def _dense_layers(spec: NetworkSpec) -> list[LayerSpec]:
    return [layer for layer in spec.layers if layer.kind == "dense"]


def synthetic_r(spec: NetworkSpec) -> dict[str, float]:
    dense = _dense_layers(spec)
    if len(dense) != 2 or len(spec.layers) != 2:
        raise ApplicabilityError(f"synthetic_r needs exactly two dense layers, got {len(spec.layers)} layers")
    first, second = dense
    if first.activation is None or first.activation.kind != "tanh" or second.activation is not None:
        raise ApplicabilityError("synthetic_r needs tanh after the first layer and no activation after the second")
    if spec.final.kind != "gaussian_bump":
        raise ApplicabilityError(f"synthetic_r needs a gaussian_bump final transform, got {spec.final.kind}")
    spec = propagate_domains(spec, "tight")
    # sup of prod 1/(1 - x_i^2) over tanh(X~_1) is the squared Koopman bound
    sup_term = koopman_norm_tanh(spec.layers[0].domain_tilde).value ** 2
    det_term = det_factor_injective(first.weights) * det_factor_injective(second.weights)
    return {"r": abs(spec.final.w3) * sup_term * det_term, "sup_term": sup_term, "det_term": det_term}


def _quarter_det(weights: np.ndarray) -> float:
    """|det W*W|^{1/4}, 0 when W is not injective"""
    result = svd(weights)
    if result.numerical_rank < weights.shape[1]:
        return 0.0
    return float(np.prod(np.sqrt(result.singular_values[: weights.shape[1]])))


def dense_r123(spec: NetworkSpec) -> dict[str, float]:
    dense = _dense_layers(spec)
    if len(dense) < 2 or any(layer.activation is None for layer in dense[:2]):
        raise ApplicabilityError("dense_r123 needs at least two dense layers with activations in front")
    spec = propagate_domains(spec, "paper_recipe")
    first_two = _dense_layers(spec)[:2]
    r1 = sum(float(np.max(koopman_norm(layer.activation, layer.domain_tilde).per_dimension_sup)) for layer in first_two)
    r2 = sum(1.0 / (1.0 + _quarter_det(layer.weights)) for layer in first_two)
    r3 = sum(svd(layer.weights).spectral_norm for layer in first_two)
    return {"r1": r1, "r2": r2, "r3": r3, "total": r1 + r2 + r3}


def lenet_r123(spec: NetworkSpec) -> dict[str, float]:
    linear = [layer for layer in spec.layers if layer.kind in ("dense", "conv")]
    if not linear:
        raise ApplicabilityError("lenet_r123 needs dense or conv layers")
    active = [layer for layer in linear if layer.activation is not None]
    if any(layer.activation.kind not in ("tanh", "sigmoid") for layer in active):
        raise ApplicabilityError("lenet_r123 needs bounded activations (tanh or sigmoid)")
    spec = propagate_domains(spec, "paper_recipe")
    r1 = 0.0
    r2 = 0.0
    for layer in spec.layers:
        if layer.kind not in ("dense", "conv"):
            continue
        if layer.activation is not None:
            reach = np.maximum(np.abs(layer.domain.lower), np.abs(layer.domain.upper))
            r1 += float(np.max(1.0 / (2.0 - reach ** 2)))
        r2 += 1.0 / (0.01 + svd(layer.linear_matrix()).smallest_singular_value)
    r3 = svd(linear[-1].linear_matrix()).spectral_norm
    return {"r1": r1, "r2": r2, "r3": r3, "total": r1 + r2 + r3}


def regularizer_values(spec: NetworkSpec, mode: str) -> dict[str, float]:
    if mode == "synthetic_r":
        return synthetic_r(spec)
    if mode == "dense_r123":
        return dense_r123(spec)
    if mode == "lenet_r123":
        return lenet_r123(spec)
    raise ApplicabilityError(f"unknown regularizer mode {mode!r}, expected one of {MODES}")

"""
Forward evaluation of every model flavor, on single points or batches.
"""
import warnings
from typing import Callable, Union

import numpy as np

from core.base.errors import KoopboundWarning, NumericError
from core.linalg.svd import svd
from core.network.domains import ensure_domains
from core.network.spec import NetworkSpec

Evaluable = Callable[[np.ndarray], np.ndarray]


def det_scaling(spec: NetworkSpec) -> float:
    """prod_l |det W_l|^{1/2} over the dense layers"""
    scale = 1.0
    for layer in spec.layers:
        if layer.kind == "dense":
            scale *= float(np.prod(np.sqrt(svd(layer.weights).singular_values)))
    return scale


def _check_finite(values: np.ndarray, layer_index: int):
    if not np.all(np.isfinite(values)):
        raise NumericError("non-finite intermediate value", layer_index)


def forward(spec: NetworkSpec, x, check_domain: bool = True) -> Union[float, complex, np.ndarray]:
    """
    Evaluate f(x).

    The general flavor multiplies by the indicators of X_0 and of every hidden
    X_l. The cnn flavor multiplies by the indicators of the post-activation
    conv boxes before the last conv layer only and leaves X_0 ungated.

    Args:
        spec: network to evaluate
        x: a point (d,) or a batch (n, d)
        check_domain: warn when inputs fall outside X_0

    Returns:
        a scalar for a single point, an (n,) array for a batch
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    z = x.reshape(-1, spec.input_dim)
    if check_domain:
        outside = int(np.sum(~spec.input_domain.contains(z)))
        if outside:
            warnings.warn(f"{outside} input point(s) outside the input domain", KoopboundWarning, stacklevel=2)

    gated = spec.model_flavor in ("cnn", "general")
    if gated:
        spec = ensure_domains(spec)
    keep = np.ones(z.shape[0], dtype=bool)
    if spec.model_flavor == "general":
        keep &= spec.input_domain.contains(z)
    phase = np.zeros(z.shape[0])
    last = len(spec.layers) - 1

    for position, layer in enumerate(spec.layers):
        if layer.kind == "heisenberg":
            phase += z @ layer.group.a + layer.group.phase_constant
        z = layer.apply_linear(z)
        _check_finite(z, position + 1)
        if layer.activation is not None:
            z = layer.activation(z)
            _check_finite(z, position + 1)
        if position < last:
            # psi factors: indicator of the declared box
            if spec.model_flavor == "general" or (spec.model_flavor == "cnn" and layer.kind == "conv"):
                keep &= layer.domain.contains(z)

    out = spec.final(z)
    if spec.model_flavor == "heisenberg":
        out = out * np.exp(1j * phase)
    elif spec.model_flavor == "affine_scaled":
        out = out * det_scaling(spec)
    if gated:
        out = np.where(keep, out, 0.0)
    return out[0] if single else out


def as_function(spec: NetworkSpec) -> Evaluable:
    """f(spec) as a batch evaluable on R^d (no domain warnings)"""
    def evaluate(points: np.ndarray) -> np.ndarray:
        return forward(spec, np.atleast_2d(points), check_domain=False)
    return evaluate


def affine_action(weights, shift, h: Evaluable) -> Evaluable:
    """rho(W, b) h (x) = |det W|^{1/2} h(W (x - b))"""
    weights = np.asarray(weights, dtype=np.float64)
    shift = np.asarray(shift, dtype=np.float64)
    scale = float(np.prod(np.sqrt(svd(weights).singular_values)))

    def evaluate(points: np.ndarray) -> np.ndarray:
        return scale * h((np.atleast_2d(points) - shift) @ weights.T)
    return evaluate


def heisenberg_action(a, b, c: float, h: Evaluable) -> Evaluable:
    """rho(a, b, c) h (x) = e^{i(c - <a,b>/2)} e^{i<a,x>} h(x - b)"""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    constant = c - 0.5 * float(np.dot(a, b))

    def evaluate(points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        return np.exp(1j * (constant + points @ a)) * h(points - b)
    return evaluate


def tail(spec: NetworkSpec, position: int) -> Evaluable:
    """
    f_l: the network from the pre-activation of layer ``position`` onwards,
    v o W_L o sigma_{L-1} o ... o W_{l+1} o sigma_l, as a batch evaluable.
    """
    gated = spec.model_flavor == "general"
    if gated:
        spec = ensure_domains(spec)
    layers = spec.layers
    last = len(layers) - 1

    def evaluate(points: np.ndarray) -> np.ndarray:
        z = np.atleast_2d(np.asarray(points, dtype=np.float64))
        keep = np.ones(z.shape[0], dtype=bool)
        for p in range(position, len(layers)):
            layer = layers[p]
            if p > position:
                z = layer.apply_linear(z)
            if layer.activation is not None:
                z = layer.activation(z)
            _check_finite(z, p + 1)
            if gated and p < last:
                keep &= layer.domain.contains(z)
        out = spec.final(z)
        return np.where(keep, out, 0.0) if gated else out
    return evaluate

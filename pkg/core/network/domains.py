"""
Domain propagation X_0 -> X~_1 -> X_1 -> ... through the layers.

tight:        X~_l = interval image of X_{l-1} under the layer's affine map
paper_recipe: X~_l = (||W_l|| rho_{l-1} + ||b_l||_inf) [-1, 1]^{d_l},
              rho_{l-1} the sup-norm radius of X_{l-1}
X_l = sigma_l(X~_l), or X~_l when the layer has no activation.
"""
import warnings
from typing import Optional

import numpy as np

from core.base.domain import DomainBox
from core.base.errors import KoopboundWarning, ParameterError
from core.linalg.interval import interval_affine_image, widen
from core.linalg.svd import spectral_norm
from core.network.spec import LayerSpec, NetworkSpec, DomainMode, canonical_domain_mode


def tight_image(layer: LayerSpec, prev: DomainBox) -> DomainBox:
    if layer.kind == "heisenberg":
        return widen(DomainBox(prev.lower - layer.group.b, prev.upper - layer.group.b))
    return interval_affine_image(layer.linear_matrix(), layer.offset(), prev)


def recipe_image(layer: LayerSpec, prev: DomainBox) -> DomainBox:
    radius = spectral_norm(layer.linear_matrix()) * prev.inf_radius
    offset = layer.offset()
    if offset.size:
        radius += float(np.max(np.abs(offset)))
    # at least the rounding allowance of the tight image
    n = layer.in_dim
    radius *= 1.0 + 4.0 * (n + 2) * np.sqrt(n) * np.finfo(np.float64).eps
    return widen(DomainBox.symmetric(radius, layer.out_dim))


def _reconcile(declared: Optional[DomainBox], required: DomainBox, what: str) -> DomainBox:
    """Keep a declared box that contains the required one, otherwise inflate with a warning"""
    if declared is None:
        return required
    if declared.dim != required.dim:
        raise ParameterError(f"{what} has dimension {declared.dim}, expected {required.dim}")
    if declared.contains_box(required):
        return declared
    warnings.warn(f"{what} does not contain the propagated image, inflating it to their hull", KoopboundWarning, stacklevel=3)
    return declared.hull(required)


def propagate_domains(spec: NetworkSpec, mode: Optional[DomainMode] = None) -> NetworkSpec:
    """Return a copy of ``spec`` with every X~_l and X_l filled in"""
    mode = canonical_domain_mode(mode or spec.domain_mode)
    prev = spec.input_domain
    layers = []
    for index, layer in enumerate(spec.layers, start=1):
        tight = tight_image(layer, prev)
        if mode == "paper_recipe" and layer.kind != "heisenberg":
            candidate = recipe_image(layer, prev)
            if not candidate.contains_box(tight):
                warnings.warn(f"layer {index}: recipe box misses the tight image, inflating to their hull", KoopboundWarning, stacklevel=2)
                candidate = candidate.hull(tight)
        else:
            candidate = tight
        domain_tilde = _reconcile(layer.domain_tilde, candidate, f"layer {index} domain_tilde")
        image = layer.activation.image(domain_tilde) if layer.activation is not None else domain_tilde
        domain = _reconcile(layer.domain, image, f"layer {index} domain")
        layers.append(layer.with_domains(domain_tilde, domain))
        prev = domain
    return spec.with_layers(layers)


def ensure_domains(spec: NetworkSpec) -> NetworkSpec:
    return spec if spec.is_propagated else propagate_domains(spec)

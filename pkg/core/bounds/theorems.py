"""
Right-hand sides of the Rademacher complexity bounds.

thm1  ||v|| prod ||A_l|| / sqrt(S)                              (unitary representations)
thm2  thm1 * prod |det W_l|^{-1/2}                               (square invertible weights)
thm3  ||v|| prod ||A_l|| alpha(f_l) / (sqrt(S) prod |det W_l*W_l|^{1/4})   (injective weights)
thm4  thm3 with restricted determinants and kernel volumes       (any rank)
cnn   ||v|| prod ||K_sigma_l|| mu_ker(P_l)(Y^_l) / (sqrt(S) prod |beta_l|^{1/2})
"""
import math
import warnings
from dataclasses import replace
from typing import Literal, Optional, Sequence

import numpy as np

from core.activations.koopman import koopman_norm
from core.base.domain import DomainBox
from core.base.errors import (
    ApplicabilityError,
    ConstraintViolationError,
    InfiniteFactorError,
    KoopboundWarning,
    ParameterError,
)
from core.base.montecarlo import McConfig, uniform_config
from core.bounds.alpha import estimate_alpha
from core.bounds.report import AlphaEstimate, BoundReport, LayerFactors, assemble
from core.linalg.circulant import log_abs_beta
from core.linalg.determinants import det_factor_injective, det_factor_invertible, det_factor_restricted
from core.linalg.interval import interval_affine_image
from core.linalg.svd import svd
from core.network.domains import ensure_domains
from core.network.forward import tail
from core.network.spec import LayerSpec, NetworkSpec
from core.network.vnorm import v_norm as final_norm

AlphaMode = Literal["estimate", "conservative"]
HatMode = Literal["propagated", "activation_range"]

ALPHA_SAMPLES = 200_000
# factors within this relative distance above D still satisfy the cap
CAP_RTOL = 1e-12


def _check_samples(sample_size: int):
    if sample_size < 1:
        raise ParameterError(f"sample size S must be >= 1, got {sample_size}")


def _check_cap(factor: float, cap: Optional[float], what: str):
    if cap is not None and factor > cap * (1.0 + CAP_RTOL):
        raise ConstraintViolationError(f"{what} = {factor:.6g} exceeds the cap D = {cap:.6g}")


def _cap_value(cap: Optional[float], depth: int) -> Optional[float]:
    return None if cap is None else float(cap) ** depth


def layer_koopman_norm(layer: LayerSpec) -> float:
    if layer.activation is None:
        return 1.0
    return koopman_norm(layer.activation, layer.domain_tilde).value


def default_mc(spec: NetworkSpec, seed: int = 0, sample_count: int = ALPHA_SAMPLES) -> McConfig:
    return uniform_config(spec.input_domain, sample_count, seed)


def _v_norm(spec: NetworkSpec, mc: Optional[McConfig]) -> float:
    return final_norm(spec.final, spec.last_domain, mc.child("v_norm") if mc is not None else None)


def bound_thm1(koopman_norms: Sequence[float], v_norm: float, sample_size: int) -> BoundReport:
    """(prod ||A_l||) ||v|| / sqrt(S); an empty norm list is the single-layer case"""
    _check_samples(sample_size)
    per_layer = [LayerFactors(index=i, kind="activation", koopman_norm=float(a)) for i, a in enumerate(koopman_norms, start=1)]
    value = assemble(v_norm, per_layer, sample_size)
    return BoundReport(theorem="thm1", sample_size=sample_size, per_layer=per_layer, v_norm=v_norm, value=value)


def thm1_for_spec(spec: NetworkSpec, sample_size: int, mc: Optional[McConfig] = None) -> BoundReport:
    _check_samples(sample_size)
    spec = ensure_domains(spec)
    per_layer = [LayerFactors(index=p + 1, kind=layer.kind, koopman_norm=layer_koopman_norm(layer))
                 for p, layer in spec.weight_layers()]
    norm = _v_norm(spec, mc)
    value = assemble(norm, per_layer, sample_size)
    return BoundReport(theorem="thm1", sample_size=sample_size, per_layer=per_layer, v_norm=norm, value=value,
                       seed=None if mc is None else mc.root_seed)


def bound_thm2(spec: NetworkSpec, sample_size: int, cap: Optional[float] = None, mc: Optional[McConfig] = None) -> BoundReport:
    """thm1 value times prod |det W_l|^{-1/2} at the given weights; the sup over the D-ball is D^L"""
    _check_samples(sample_size)
    if spec.model_flavor != "affine_scaled":
        hint = {"cnn": "cnn", "heisenberg": "thm1"}.get(spec.model_flavor, "thm3")
        raise ApplicabilityError(f"thm2 covers affine-scaled dense networks, not {spec.model_flavor}", hint=hint)
    spec = ensure_domains(spec)
    per_layer = []
    for p, layer in spec.weight_layers():
        if layer.kind != "dense" or layer.weights.shape[0] != layer.weights.shape[1]:
            raise ApplicabilityError(f"layer {p + 1}: thm2 needs square dense weights", hint="thm3")
        try:
            factor = det_factor_invertible(layer.weights)
        except InfiniteFactorError as e:
            raise ApplicabilityError(f"layer {p + 1}: {e}", hint="thm4") from e
        _check_cap(factor, cap, f"layer {p + 1} |det W|^(-1/2)")
        per_layer.append(LayerFactors(index=p + 1, kind="dense", koopman_norm=layer_koopman_norm(layer), det_factor=factor))
    norm = _v_norm(spec, mc)
    value = assemble(norm, per_layer, sample_size)
    return BoundReport(theorem="thm2", sample_size=sample_size, per_layer=per_layer, v_norm=norm, value=value,
                       cap=_cap_value(cap, len(per_layer)), seed=None if mc is None else mc.root_seed)


def _require_dense(spec: NetworkSpec, theorem: str):
    if spec.model_flavor not in ("plain", "general"):
        hint = {"cnn": "cnn", "heisenberg": "thm1", "affine_scaled": "thm2"}.get(spec.model_flavor)
        raise ApplicabilityError(f"{theorem} covers plain dense networks, not {spec.model_flavor}", hint=hint)
    for p, layer in spec.weight_layers():
        if layer.kind != "dense":
            raise ApplicabilityError(f"layer {p + 1}: {theorem} needs dense layers, got {layer.kind}", hint="cnn")


def _alpha(spec: NetworkSpec, position: int, layer: LayerSpec, mc: McConfig) -> AlphaEstimate:
    return estimate_alpha(tail(spec, position), layer.weights, spec.domain_before(position), layer.domain_tilde,
                          mc.child("alpha", position + 1), bias=layer.bias)


def bound_thm3(spec: NetworkSpec, sample_size: int, cap: Optional[float] = None, mc: Optional[McConfig] = None,
               alpha_mode: AlphaMode = "estimate") -> BoundReport:
    """
    Injective-weight bound.

    alpha is paired with ||A_l|| for l = 1..L-1 only; ``conservative`` sets
    every alpha to 1.
    """
    _check_samples(sample_size)
    _require_dense(spec, "thm3")
    spec = ensure_domains(spec)
    if alpha_mode == "estimate" and mc is None:
        mc = default_mc(spec)
    layers = spec.weight_layers()
    per_layer = []
    for k, (p, layer) in enumerate(layers):
        factor = det_factor_injective(layer.weights)
        _check_cap(factor, cap, f"layer {p + 1} |det W*W|^(-1/4)")
        alpha = _alpha(spec, p, layer, mc) if alpha_mode == "estimate" and k < len(layers) - 1 else None
        per_layer.append(LayerFactors(index=p + 1, kind="dense", koopman_norm=layer_koopman_norm(layer),
                                      det_factor=factor, alpha=alpha))
    norm = _v_norm(spec, mc)
    value = assemble(norm, per_layer, sample_size)
    return BoundReport(theorem="thm3", sample_size=sample_size, per_layer=per_layer, v_norm=norm, value=value,
                       cap=_cap_value(cap, len(per_layer)), seed=None if mc is None else mc.root_seed,
                       alpha_mode=alpha_mode)


def coefficient_box(kernel_basis: np.ndarray, domain: DomainBox) -> DomainBox:
    """Interval enclosure of {Q^T x : x in domain}, the coefficients along the kernel directions"""
    q = np.asarray(kernel_basis)
    if np.iscomplexobj(q):
        q = np.real_if_close(q, tol=1000)
    return interval_affine_image(np.asarray(q, dtype=np.float64).T, None, domain)


def kernel_volume(kernel_basis: np.ndarray, bounds: Optional[DomainBox]) -> float:
    """prod (b_i - a_i) over the kernel coefficient box; 1 for a trivial kernel"""
    basis = np.asarray(kernel_basis)
    k = basis.shape[1] if basis.ndim == 2 else 0
    if k == 0:
        return 1.0
    if bounds is None or bounds.dim != k:
        raise ParameterError(f"kernel of dimension {k} needs a {k}-d coefficient box")
    return float(np.prod(bounds.widths))


def bound_thm4(spec: NetworkSpec, sample_size: int, cap: Optional[float] = None, mc: Optional[McConfig] = None,
               alpha_mode: AlphaMode = "estimate", y_boxes: Optional[dict[int, DomainBox]] = None) -> BoundReport:
    """
    Any-rank bound with restricted determinants and kernel volumes.

    ``y_boxes`` maps a 1-based layer index to its kernel coefficient box;
    missing layers derive it from the propagated X_{l-1}. alpha is estimated
    on injective layers only and set to 1 elsewhere.
    """
    _check_samples(sample_size)
    _require_dense(spec, "thm4")
    spec = ensure_domains(spec)
    if alpha_mode == "estimate" and mc is None:
        mc = default_mc(spec)
    layers = spec.weight_layers()
    per_layer = []
    notes = []
    for k, (p, layer) in enumerate(layers):
        restricted = det_factor_restricted(layer.weights)
        _check_cap(restricted.factor, cap, f"layer {p + 1} restricted |det W|^(-1/2)")
        basis = restricted.kernel_basis
        if basis.shape[1] == 0:
            volume = 1.0
        else:
            box = (y_boxes or {}).get(p + 1)
            if box is None:
                box = coefficient_box(basis, spec.domain_before(p))
            volume = kernel_volume(basis, box)
        alpha = None
        if alpha_mode == "estimate" and k < len(layers) - 1:
            if restricted.rank == layer.weights.shape[1]:
                alpha = _alpha(spec, p, layer, mc)
            else:
                notes.append(f"layer {p + 1} is not injective, alpha set to 1")
                warnings.warn(f"layer {p + 1} is not injective, alpha set to 1", KoopboundWarning, stacklevel=2)
        per_layer.append(LayerFactors(index=p + 1, kind="dense", koopman_norm=layer_koopman_norm(layer),
                                      det_factor=restricted.factor, alpha=alpha, kernel_volume=volume))
    norm = _v_norm(spec, mc)
    value = assemble(norm, per_layer, sample_size)
    return BoundReport(theorem="thm4", sample_size=sample_size, per_layer=per_layer, v_norm=norm, value=value,
                       cap=_cap_value(cap, len(per_layer)), seed=None if mc is None else mc.root_seed,
                       alpha_mode=alpha_mode, notes=notes)


def _hat_box(spec: NetworkSpec, position: int, hat_mode: HatMode) -> DomainBox:
    """Y^ for the pool layer at ``position``"""
    if hat_mode == "activation_range":
        previous = spec.layers[position - 1] if position > 0 else None
        box = previous.activation.range_box(previous.out_dim) if previous is not None and previous.activation is not None else None
        if box is None:
            raise ApplicabilityError(f"layer {position + 1}: activation_range needs a bounded activation before the pool",
                                     hint="hat_mode=propagated")
        return box
    return spec.domain_before(position)


def bound_cnn(spec: NetworkSpec, sample_size: int, cap: Optional[float] = None, mc: Optional[McConfig] = None,
              hat_mode: HatMode = "propagated") -> BoundReport:
    _check_samples(sample_size)
    if spec.model_flavor != "cnn":
        raise ApplicabilityError(f"the cnn bound needs the cnn flavor, got {spec.model_flavor}", hint="thm4")
    if hat_mode not in ("propagated", "activation_range"):
        raise ParameterError(f"unknown hat_mode {hat_mode!r}")
    spec = ensure_domains(spec)
    per_layer: list[LayerFactors] = []
    pooled = False
    for p, layer in enumerate(spec.layers):
        if layer.kind == "conv":
            log_beta = log_abs_beta(layer.conv.theta, layer.conv.scaling)
            if not np.isfinite(log_beta):
                raise InfiniteFactorError(f"layer {p + 1}: some gamma_m vanishes, the convolution is not invertible")
            factor = math.exp(-0.5 * log_beta)
            _check_cap(factor, cap, f"layer {p + 1} |beta|^(-1/2)")
            per_layer.append(LayerFactors(index=p + 1, kind="conv", koopman_norm=layer_koopman_norm(layer),
                                          det_factor=factor, beta=math.exp(log_beta)))
            pooled = False
            continue
        basis = svd(layer.linear_matrix()).kernel_basis
        volume = kernel_volume(basis, coefficient_box(basis, _hat_box(spec, p, hat_mode)) if basis.shape[1] else None)
        if per_layer and per_layer[-1].kind == "conv" and not pooled:
            # ||K~_{psi,P}|| <= mu_ker(P)(Y^) joins the conv layer it follows
            per_layer[-1] = replace(per_layer[-1], kernel_volume=volume)
            pooled = True
        else:
            per_layer.append(LayerFactors(index=p + 1, kind="pool", kernel_volume=volume))
    norm = _v_norm(spec, mc)
    depth = sum(1 for layer in per_layer if layer.kind == "conv")
    value = assemble(norm, per_layer, sample_size)
    return BoundReport(theorem="cnn", sample_size=sample_size, per_layer=per_layer, v_norm=norm, value=value,
                       cap=_cap_value(cap, depth), seed=None if mc is None else mc.root_seed,
                       notes=[f"hat_mode = {hat_mode}"])


def evaluate_bound(spec: NetworkSpec, theorem: str, sample_size: int, cap: Optional[float] = None,
                   mc: Optional[McConfig] = None, alpha_mode: AlphaMode = "estimate",
                   hat_mode: HatMode = "propagated") -> BoundReport:
    """Dispatch on the theorem tag"""
    if theorem == "thm1":
        return thm1_for_spec(spec, sample_size, mc)
    if theorem == "thm2":
        return bound_thm2(spec, sample_size, cap, mc)
    if theorem == "thm3":
        return bound_thm3(spec, sample_size, cap, mc, alpha_mode)
    if theorem == "thm4":
        return bound_thm4(spec, sample_size, cap, mc, alpha_mode)
    if theorem == "cnn":
        return bound_cnn(spec, sample_size, cap, mc, hat_mode)
    raise ParameterError(f"unknown theorem {theorem!r}")

"""
Immutable network description: layers, final transform v, input domain X_0
and model flavor.
"""
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Literal, Optional, Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from core.activations.catalogue import ActivationSpec
from core.base.domain import DomainBox
from core.base.errors import DimensionError, ParameterError
from core.linalg.circulant import convolution_matrix, pool_groups, pool_matrix
from core.linalg.svd import as_matrix

LayerKind = Literal["dense", "conv", "pool", "heisenberg"]
ModelFlavor = Literal["plain", "affine_scaled", "heisenberg", "cnn", "general"]
DomainMode = Literal["tight", "paper_recipe"]
FinalKind = Literal["gaussian_bump", "softmax", "lookup_table", "coordinate"]
NormMode = Literal["exact", "measure_bound"]

FLAVORS = ("plain", "affine_scaled", "heisenberg", "cnn", "general")
DOMAIN_MODES = ("tight", "paper_recipe")
# older spelling of the recipe mode
DOMAIN_MODE_ALIASES = {"norm_recipe": "paper_recipe"}


def canonical_domain_mode(mode: str) -> str:
    mode = DOMAIN_MODE_ALIASES.get(mode, mode)
    if mode not in DOMAIN_MODES:
        raise ParameterError(f"unknown domain_mode {mode!r}")
    return mode


def _vector(values, name: str) -> np.ndarray:
    array = np.array(values, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(array)):
        raise ParameterError(f"{name} has non-finite entries")
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class ConvKernel:
    """theta over the index set I = theta.shape; scaling None means the DFT scaling"""
    theta: np.ndarray
    scaling: Optional[np.ndarray] = None

    def __post_init__(self):
        theta = np.array(self.theta, dtype=np.float64)
        if theta.size == 0:
            raise ParameterError("convolution kernel over an empty index set")
        theta.flags.writeable = False
        object.__setattr__(self, "theta", theta)

    @property
    def index_shape(self) -> tuple[int, ...]:
        return tuple(self.theta.shape)

    @property
    def size(self) -> int:
        return int(self.theta.size)

    @cached_property
    def dense(self) -> np.ndarray:
        return convolution_matrix(self.theta)

    def matrix(self) -> np.ndarray:
        return self.dense

    def apply(self, x: np.ndarray) -> np.ndarray:
        # dense product keeps the rounding inside the interval image's allowance
        return x @ self.dense.T


@dataclass(frozen=True, eq=False)
class HeisenbergElement:
    a: np.ndarray
    b: np.ndarray
    c: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "a", _vector(self.a, "heisenberg a"))
        object.__setattr__(self, "b", _vector(self.b, "heisenberg b"))
        if self.a.size != self.b.size:
            raise DimensionError(f"heisenberg a and b have lengths {self.a.size} and {self.b.size}")

    @property
    def phase_constant(self) -> float:
        """c - <a, b>/2"""
        return float(self.c - 0.5 * np.dot(self.a, self.b))


@dataclass(frozen=True, eq=False)
class LayerSpec:
    kind: LayerKind
    weights: Optional[np.ndarray] = None
    bias: Optional[np.ndarray] = None
    conv: Optional[ConvKernel] = None
    pool_index_set: Optional[tuple[int, ...]] = None
    pool_window: Optional[tuple[int, ...]] = None
    group: Optional[HeisenbergElement] = None
    activation: Optional[ActivationSpec] = None
    domain_tilde: Optional[DomainBox] = None
    domain: Optional[DomainBox] = None

    def __post_init__(self):
        if self.kind == "dense":
            if self.weights is None:
                raise ParameterError("dense layer without weights")
            weights = as_matrix(self.weights)
            if np.iscomplexobj(weights):
                raise ParameterError("dense weights must be real")
            weights.flags.writeable = False
            object.__setattr__(self, "weights", weights)
            bias = np.zeros(weights.shape[0]) if self.bias is None else self.bias
            object.__setattr__(self, "bias", _vector(bias, "bias"))
            if self.bias.size != weights.shape[0]:
                raise DimensionError(f"bias of length {self.bias.size} for weights of shape {weights.shape}")
        elif self.kind == "conv":
            if self.conv is None:
                raise ParameterError("conv layer without a kernel")
            bias = np.zeros(self.conv.size) if self.bias is None else self.bias
            object.__setattr__(self, "bias", _vector(bias, "bias"))
        elif self.kind == "pool":
            if self.pool_index_set is None or self.pool_window is None:
                raise ParameterError("pool layer needs an index set and a window")
            object.__setattr__(self, "pool_index_set", tuple(int(n) for n in self.pool_index_set))
            object.__setattr__(self, "pool_window", tuple(int(w) for w in self.pool_window))
            pool_groups(self.pool_index_set, self.pool_window)
            if self.activation is not None:
                raise ParameterError("pool layers carry no activation")
        elif self.kind == "heisenberg":
            if self.group is None:
                raise ParameterError("heisenberg layer without a group element")
        else:
            raise ParameterError(f"unknown layer kind {self.kind!r}")

    @property
    def in_dim(self) -> int:
        if self.kind == "dense":
            return int(self.weights.shape[1])
        if self.kind == "conv":
            return self.conv.size
        if self.kind == "pool":
            return int(np.prod(self.pool_index_set))
        return int(self.group.a.size)

    @property
    def out_dim(self) -> int:
        if self.kind == "dense":
            return int(self.weights.shape[0])
        return self.in_dim

    @property
    def pool_size(self) -> int:
        return int(np.prod(self.pool_window)) if self.pool_window else 1

    def linear_matrix(self) -> np.ndarray:
        """Dense matrix of the linear part"""
        if self.kind == "dense":
            return self.weights
        if self.kind == "conv":
            return self.conv.matrix()
        if self.kind == "pool":
            return pool_matrix(self.pool_index_set, self.pool_window)
        return np.eye(self.in_dim)

    def offset(self) -> np.ndarray:
        """Additive part of the affine map"""
        if self.kind == "pool":
            return np.zeros(self.out_dim)
        if self.kind == "heisenberg":
            return -self.group.b
        return self.bias

    def apply_linear(self, x: np.ndarray) -> np.ndarray:
        """Affine part on a batch (n, in_dim)"""
        if self.kind == "dense":
            return x @ self.weights.T + self.bias
        if self.kind == "conv":
            return self.conv.apply(x) + self.bias
        if self.kind == "pool":
            return x @ self.linear_matrix().T
        return x - self.group.b

    def with_domains(self, domain_tilde: DomainBox, domain: DomainBox) -> "LayerSpec":
        return replace(self, domain_tilde=domain_tilde, domain=domain)

    def with_weights(self, weights: np.ndarray, bias: Optional[np.ndarray] = None) -> "LayerSpec":
        return replace(self, weights=weights, bias=self.bias if bias is None else bias, domain_tilde=None, domain=None)


def dense_layer(weights, bias=None, activation: Optional[ActivationSpec] = None) -> LayerSpec:
    return LayerSpec(kind="dense", weights=np.asarray(weights, dtype=np.float64),
                     bias=None if bias is None else np.asarray(bias, dtype=np.float64), activation=activation)


def conv_layer(theta, activation: Optional[ActivationSpec] = None, bias=None, scaling=None) -> LayerSpec:
    return LayerSpec(kind="conv", conv=ConvKernel(np.asarray(theta, dtype=np.float64), scaling), bias=bias, activation=activation)


def pool_layer(index_set: Sequence[int], window: Sequence[int]) -> LayerSpec:
    return LayerSpec(kind="pool", pool_index_set=tuple(index_set), pool_window=tuple(window))


def heisenberg_layer(a, b, c: float = 0.0, activation: Optional[ActivationSpec] = None) -> LayerSpec:
    return LayerSpec(kind="heisenberg", group=HeisenbergElement(np.asarray(a), np.asarray(b), float(c)), activation=activation)


@dataclass(frozen=True, eq=False)
class FinalTransform:
    kind: FinalKind
    w3: float = 1.0
    norm_mode: NormMode = "exact"
    target_class: int = 0
    index: int = 0
    table: Optional[np.ndarray] = None
    grid: Optional[DomainBox] = None

    def __post_init__(self):
        if self.kind not in ("gaussian_bump", "softmax", "lookup_table", "coordinate"):
            raise ParameterError(f"unknown final transform {self.kind!r}")
        if self.norm_mode not in ("exact", "measure_bound"):
            raise ParameterError(f"unknown norm_mode {self.norm_mode!r}")
        if self.kind == "lookup_table":
            if self.table is None or self.grid is None:
                raise ParameterError("lookup_table needs a table and a grid box")
            table = np.array(self.table, dtype=np.float64)
            if table.ndim != self.grid.dim or any(n < 2 for n in table.shape):
                raise DimensionError(f"table of shape {table.shape} does not fit a {self.grid.dim}-d grid")
            object.__setattr__(self, "table", table)

    def __call__(self, y: np.ndarray) -> np.ndarray:
        """v on a batch (n, d)"""
        if self.kind == "gaussian_bump":
            return self.w3 * np.exp(-np.sum(y * y, axis=1))
        if self.kind == "softmax":
            shifted = y - y.max(axis=1, keepdims=True)
            weights = np.exp(shifted)
            return weights[:, self.target_class] / weights.sum(axis=1)
        if self.kind == "coordinate":
            return y[:, self.index]
        return self._interpolator()(np.clip(y, self.grid.lower, self.grid.upper))

    def _interpolator(self) -> RegularGridInterpolator:
        axes = tuple(np.linspace(lo, hi, n) for lo, hi, n in zip(self.grid.lower, self.grid.upper, self.table.shape))
        return RegularGridInterpolator(axes, self.table, method="linear")

    def check_dim(self, d: int):
        if self.kind == "softmax" and not 0 <= self.target_class < d:
            raise DimensionError(f"softmax target_class {self.target_class} outside 0..{d - 1}")
        if self.kind == "coordinate" and not 0 <= self.index < d:
            raise DimensionError(f"coordinate index {self.index} outside 0..{d - 1}")
        if self.kind == "lookup_table" and self.grid.dim != d:
            raise DimensionError(f"lookup table is {self.grid.dim}-d, network output is {d}-d")


@dataclass(frozen=True, eq=False)
class NetworkSpec:
    input_domain: DomainBox
    layers: tuple[LayerSpec, ...]
    final: FinalTransform
    model_flavor: ModelFlavor = "plain"
    domain_mode: DomainMode = "tight"

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "domain_mode", canonical_domain_mode(self.domain_mode))
        if self.model_flavor not in FLAVORS:
            raise ParameterError(f"unknown model_flavor {self.model_flavor!r}")
        if not self.layers:
            raise ParameterError("network has no layers")
        dim = self.input_domain.dim
        for index, layer in enumerate(self.layers, start=1):
            if layer.in_dim != dim:
                raise DimensionError(f"layer {index} expects input dimension {layer.in_dim}, got {dim}")
            dim = layer.out_dim
        self.final.check_dim(dim)

        kinds = {layer.kind for layer in self.layers}
        if self.model_flavor == "heisenberg" and kinds != {"heisenberg"}:
            raise ParameterError("heisenberg flavor takes heisenberg layers only")
        if self.model_flavor != "heisenberg" and "heisenberg" in kinds:
            raise ParameterError(f"heisenberg layers in a {self.model_flavor} network")
        if self.model_flavor == "affine_scaled":
            for index, layer in enumerate(self.layers, start=1):
                if layer.kind != "dense" or layer.weights.shape[0] != layer.weights.shape[1]:
                    raise DimensionError(f"affine_scaled needs square dense layers, layer {index} is not")
        if self.model_flavor == "cnn" and "dense" in kinds:
            raise ParameterError("cnn flavor takes conv and pool layers only")

    @property
    def input_dim(self) -> int:
        return self.input_domain.dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    @property
    def depth(self) -> int:
        """L, the number of weight layers (pooling excluded)"""
        return sum(1 for layer in self.layers if layer.kind != "pool")

    @property
    def is_propagated(self) -> bool:
        return all(layer.domain_tilde is not None and layer.domain is not None for layer in self.layers)

    def weight_layers(self) -> list[tuple[int, LayerSpec]]:
        """(position in self.layers, layer) for every non-pool layer"""
        return [(i, layer) for i, layer in enumerate(self.layers) if layer.kind != "pool"]

    def domain_before(self, position: int) -> DomainBox:
        """X_{l-1}: the domain feeding layer ``position``"""
        if position == 0:
            return self.input_domain
        domain = self.layers[position - 1].domain
        if domain is None:
            raise ParameterError("network domains have not been propagated")
        return domain

    @property
    def last_domain(self) -> DomainBox:
        return self.domain_before(len(self.layers))

    def with_layers(self, layers: Sequence[LayerSpec]) -> "NetworkSpec":
        return replace(self, layers=tuple(layers))

    def with_weights(self, weights: Sequence[np.ndarray], biases: Optional[Sequence[np.ndarray]] = None) -> "NetworkSpec":
        """Replace the dense weights in order; domains are cleared"""
        dense = [i for i, layer in enumerate(self.layers) if layer.kind == "dense"]
        if len(weights) != len(dense):
            raise DimensionError(f"{len(weights)} weight matrices for {len(dense)} dense layers")
        layers = list(self.layers)
        for k, position in enumerate(dense):
            bias = None if biases is None else biases[k]
            layers[position] = layers[position].with_weights(np.asarray(weights[k], dtype=np.float64), bias)
        layers = [replace(layer, domain_tilde=None, domain=None) for layer in layers]
        return self.with_layers(layers)

    def with_final(self, final: FinalTransform) -> "NetworkSpec":
        return replace(self, final=final)

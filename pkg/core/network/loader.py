"""
Network spec files (YAML) and the KBW1 weight sidecar format.

KBW1 layout: 16-byte header (magic "KBW1", u32 rows, u32 cols, 4 reserved
bytes), then rows*cols little-endian float64 values in row-major order.
"""
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from core.activations.catalogue import make_activation
from core.base.config import BoxFile, LayerFile, NetworkFile, WeightsRef, build_dataclass, read_yaml
from core.base.domain import DomainBox
from core.base.errors import ConfigError, KoopboundError
from core.linalg.circulant import literal_scaling
from core.network.domains import propagate_domains
from core.network.spec import ConvKernel, FinalTransform, HeisenbergElement, LayerSpec, NetworkSpec

KBW_MAGIC = b"KBW1"
KBW_HEADER = 16


def read_kbw(path: Union[str, Path]) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"weight sidecar not found: {path}")
    raw = path.read_bytes()
    if len(raw) < KBW_HEADER or raw[:4] != KBW_MAGIC:
        raise ConfigError(f"{path} is not a KBW1 file")
    rows, cols = (int(v) for v in np.frombuffer(raw, dtype="<u4", count=2, offset=4))
    values = np.frombuffer(raw, dtype="<f8", offset=KBW_HEADER)
    if values.size != rows * cols:
        raise ConfigError(f"{path}: header says {rows}x{cols} but holds {values.size} values")
    return values.reshape(rows, cols).astype(np.float64)


def write_kbw(path: Union[str, Path], matrix) -> None:
    matrix = np.atleast_2d(np.asarray(matrix, dtype="<f8"))
    rows, cols = matrix.shape
    header = KBW_MAGIC + np.array([rows, cols], dtype="<u4").tobytes() + bytes(KBW_HEADER - 12)
    Path(path).write_bytes(header + np.ascontiguousarray(matrix).tobytes())


def _box(box: Optional[BoxFile]) -> Optional[DomainBox]:
    return None if box is None else DomainBox(np.array(box.lower), np.array(box.upper))


def _layer(entry: LayerFile, index_shape: tuple[int, ...], base_dir: Path) -> LayerSpec:
    activation = None
    if entry.activation is not None:
        activation = make_activation(entry.activation.kind, entry.activation.params)
    declared = dict(domain_tilde=_box(entry.domain_tilde), domain=_box(entry.domain))

    if entry.kind == "dense":
        if entry.weights is None:
            raise ConfigError("dense layer without weights")
        if isinstance(entry.weights, WeightsRef):
            weights = read_kbw(base_dir / entry.weights.file)
        else:
            weights = np.array(entry.weights, dtype=np.float64)
        bias = None if entry.bias is None else np.array(entry.bias)
        return LayerSpec(kind="dense", weights=weights, bias=bias, activation=activation, **declared)

    if entry.kind == "conv":
        if entry.conv is None:
            raise ConfigError("conv layer without a conv section")
        shape = tuple(entry.conv.index_set)
        theta = np.array(entry.conv.theta, dtype=np.float64)
        if theta.size != int(np.prod(shape)):
            raise ConfigError(f"conv theta has {theta.size} entries for index set {shape}")
        if entry.conv.scaling not in ("dft", "literal"):
            raise ConfigError(f"unknown conv scaling {entry.conv.scaling!r}")
        scaling = literal_scaling(shape) if entry.conv.scaling == "literal" else None
        bias = None if entry.bias is None else np.array(entry.bias)
        return LayerSpec(kind="conv", conv=ConvKernel(theta.reshape(shape), scaling), bias=bias,
                         activation=activation, **declared)

    if entry.kind == "pool":
        shape = tuple(entry.pool_index_set) if entry.pool_index_set else index_shape
        if entry.pool_window:
            window = tuple(entry.pool_window)
        elif entry.pool_size and len(shape) == 1:
            window = (entry.pool_size,)
        else:
            raise ConfigError("pool layer needs pool_size (1-d index sets) or pool_window")
        return LayerSpec(kind="pool", pool_index_set=shape, pool_window=window, **declared)

    if entry.kind == "heisenberg":
        if entry.group is None:
            raise ConfigError("heisenberg layer without a group section")
        group = HeisenbergElement(np.array(entry.group.a), np.array(entry.group.b), entry.group.c)
        return LayerSpec(kind="heisenberg", group=group, activation=activation, **declared)

    raise ConfigError(f"unknown layer kind {entry.kind!r}")


def network_from_file(document: NetworkFile, base_dir: Union[str, Path] = ".") -> NetworkSpec:
    base_dir = Path(base_dir)
    try:
        input_domain = _box(document.input_domain)
        layers = []
        index_shape: tuple[int, ...] = (input_domain.dim,)
        for entry in document.layers:
            layer = _layer(entry, index_shape, base_dir)
            layers.append(layer)
            index_shape = layer.conv.index_shape if layer.kind == "conv" else (
                layer.pool_index_set if layer.kind == "pool" else (layer.out_dim,))
        f = document.final
        table = None
        if f.table is not None:
            table = np.array(f.table, dtype=np.float64)
            if f.table_shape:
                table = table.reshape(tuple(f.table_shape))
        final = FinalTransform(kind=f.kind, w3=f.w3, norm_mode=f.norm_mode, target_class=f.target_class,
                               index=f.index, table=table, grid=_box(f.grid))  # type: ignore[arg-type]
        spec = NetworkSpec(input_domain=input_domain, layers=tuple(layers), final=final,
                           model_flavor=document.model_flavor, domain_mode=document.domain_mode)  # type: ignore[arg-type]
    except ConfigError:
        raise
    except (KoopboundError, ValueError) as e:
        raise ConfigError(f"invalid network spec: {e}") from e
    return propagate_domains(spec)


def network_from_dict(data: dict[str, Any], base_dir: Union[str, Path] = ".") -> NetworkSpec:
    return network_from_file(build_dataclass(NetworkFile, data, where="network spec"), base_dir)


def load_network(path: Union[str, Path], overrides: Optional[dict[str, Any]] = None) -> NetworkSpec:
    """Read, validate and propagate a network spec file"""
    data = read_yaml(path)
    if overrides:
        data.update(overrides)
    return network_from_dict(data, Path(path).parent)

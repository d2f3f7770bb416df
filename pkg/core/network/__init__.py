__all__ = [
    "NetworkSpec", "LayerSpec", "FinalTransform", "ConvKernel", "HeisenbergElement",
    "dense_layer", "conv_layer", "pool_layer", "heisenberg_layer",
    "propagate_domains", "ensure_domains", "forward", "as_function", "tail", "det_scaling",
    "affine_action", "heisenberg_action", "Regularizer", "regularized_forward", "v_norm",
    "load_network", "network_from_dict", "network_from_file", "read_kbw", "write_kbw",
]

from .spec import (
    NetworkSpec, LayerSpec, FinalTransform, ConvKernel, HeisenbergElement,
    dense_layer, conv_layer, pool_layer, heisenberg_layer,
)
from .domains import propagate_domains, ensure_domains
from .forward import forward, as_function, tail, det_scaling, affine_action, heisenberg_action
from .regularized import Regularizer, regularized_forward
from .vnorm import v_norm
from .loader import load_network, network_from_dict, network_from_file, read_kbw, write_kbw

__all__ = [
    "ActivationSpec", "make_activation", "KINDS",
    "KoopmanNormBound", "koopman_norm", "koopman_norm_tanh", "koopman_norm_sigmoid",
    "koopman_norm_leaky_relu", "koopman_norm_generic", "shift_koopman_norm",
]

from .catalogue import ActivationSpec, make_activation, KINDS
from .koopman import (
    KoopmanNormBound, koopman_norm, koopman_norm_tanh, koopman_norm_sigmoid,
    koopman_norm_leaky_relu, koopman_norm_generic, shift_koopman_norm,
)

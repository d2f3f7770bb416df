from typing import Sequence

import pandas as pd

from core.base.errors import ApplicabilityError, ParameterError
from core.bounds.theorems import bound_thm4
from core.network.domains import propagate_domains
from core.network.spec import NetworkSpec


def tradeoff_profile(spec: NetworkSpec, scales: Sequence[float], sample_size: int = 1) -> pd.DataFrame:
    """
    Scale every dense weight by c and re-evaluate the any-rank bound with alpha = 1.

    Growing c shrinks the determinant factors and widens the domains the
    activation factors are taken over; the table shows both products.
    """
    dense = [layer for layer in spec.layers if layer.kind == "dense"]
    if not dense:
        raise ApplicabilityError("tradeoff_profile needs dense layers", hint="cnn")
    rows = []
    for c in scales:
        if not c > 0.0:
            raise ParameterError(f"weight scales must be > 0, got {c}")
        scaled = propagate_domains(spec.with_weights([c * layer.weights for layer in dense],
                                                     [layer.bias for layer in dense]))
        report = bound_thm4(scaled, sample_size, alpha_mode="conservative")
        koopman = 1.0
        det = 1.0
        for layer in report.per_layer:
            koopman *= layer.koopman_norm
            det *= layer.det_factor * layer.kernel_volume
        rows.append({"scale": float(c), "koopman_product": koopman, "det_product": det,
                     "v_norm": report.v_norm, "bound": report.value})
    return pd.DataFrame(rows, columns=["scale", "koopman_product", "det_product", "v_norm", "bound"])

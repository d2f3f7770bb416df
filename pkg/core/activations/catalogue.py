"""
Elementwise activation catalogue.

Every member is a strictly increasing bijection of the real line onto its
image, so domain images of boxes are boxes and the inverse Jacobian is
diagonal.
"""
from dataclasses import dataclass, field
from typing import Any, Literal, Optional

import numpy as np
from scipy.special import expit, logit

from core.base.domain import DomainBox
from core.base.errors import ParameterError, UnsupportedActivationError
from core.linalg.interval import widen

ActivationKind = Literal["tanh", "sigmoid", "leaky_relu", "smooth_leaky_relu", "identity"]
KINDS = ("tanh", "sigmoid", "leaky_relu", "smooth_leaky_relu", "identity")

# bisection tolerance for inverting the smooth leaky ReLU
INVERSE_TOL = 1e-12
_LOG2 = float(np.log(2.0))


@dataclass(frozen=True)
class ActivationSpec:
    kind: ActivationKind
    slope: float = 0.01     # leaky_relu
    alpha: float = 0.1      # smooth_leaky_relu
    mu: float = 0.5         # smooth_leaky_relu
    elementwise: bool = field(default=True, init=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UnsupportedActivationError(f"unsupported activation {self.kind!r}")
        if self.kind == "leaky_relu" and not self.slope > 0.0:
            raise ParameterError(f"leaky_relu slope must be > 0, got {self.slope}")
        if self.kind == "smooth_leaky_relu":
            if not 0.0 < self.alpha < 1.0:
                raise ParameterError(f"smooth_leaky_relu alpha must lie in (0, 1), got {self.alpha}")
            if not self.mu > 0.0:
                raise ParameterError(f"smooth_leaky_relu mu must be > 0, got {self.mu}")

    # -- pointwise maps -------------------------------------------------

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "tanh":
            return np.tanh(x)
        if self.kind == "sigmoid":
            return expit(x)
        if self.kind == "leaky_relu":
            return np.where(x >= 0.0, x, self.slope * x)
        if self.kind == "smooth_leaky_relu":
            return self.alpha * x + (1.0 - self.alpha) * self.mu * (np.logaddexp(0.0, x / self.mu) - _LOG2)
        return x

    def derivative(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "tanh":
            return 1.0 / np.cosh(x) ** 2
        if self.kind == "sigmoid":
            s = expit(x)
            return s * (1.0 - s)
        if self.kind == "leaky_relu":
            return np.where(x >= 0.0, 1.0, self.slope)
        if self.kind == "smooth_leaky_relu":
            return self.alpha + (1.0 - self.alpha) * expit(x / self.mu)
        return np.ones_like(x)

    def inverse(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64)
        if self.kind == "tanh":
            return np.arctanh(y)
        if self.kind == "sigmoid":
            return logit(y)
        if self.kind == "leaky_relu":
            return np.where(y >= 0.0, y, y / self.slope)
        if self.kind == "smooth_leaky_relu":
            return self._bisect_inverse(y)
        return y

    def inverse_derivative(self, y: np.ndarray) -> np.ndarray:
        """(sigma^{-1})'(y) = 1 / sigma'(sigma^{-1}(y))"""
        y = np.asarray(y, dtype=np.float64)
        if self.kind == "tanh":
            return 1.0 / (1.0 - y * y)
        if self.kind == "sigmoid":
            return 1.0 / (y - y * y)
        return 1.0 / self.derivative(self.inverse(y))

    def _bisect_inverse(self, y: np.ndarray) -> np.ndarray:
        # slope in (alpha, 1) and sigma(0) = 0 bracket the root between y and y / alpha
        low = np.where(y >= 0.0, y, y / self.alpha)
        high = np.where(y >= 0.0, y / self.alpha, y)
        for _ in range(200):
            mid = 0.5 * (low + high)
            too_big = self(mid) > y
            high = np.where(too_big, mid, high)
            low = np.where(too_big, low, mid)
            if np.all(high - low <= INVERSE_TOL * np.maximum(1.0, np.abs(mid))):
                break
        return 0.5 * (low + high)

    # -- domains --------------------------------------------------------

    def image(self, box: DomainBox) -> DomainBox:
        """sigma(box), widened by a rounding allowance"""
        if self.kind == "identity":
            return box
        return widen(box.map(self))

    def range_box(self, dim: int) -> Optional[DomainBox]:
        """Closure of sigma(R^d) when bounded"""
        if self.kind == "tanh":
            return DomainBox.cube(-1.0, 1.0, dim)
        if self.kind == "sigmoid":
            return DomainBox.cube(0.0, 1.0, dim)
        return None

    @property
    def nonexpansive(self) -> bool:
        """|sigma(x)| <= |x| for every x"""
        return self.kind != "leaky_relu" or self.slope <= 1.0

    def to_json(self) -> dict[str, Any]:
        data: dict[str, Any] = {"kind": self.kind}
        if self.kind == "leaky_relu":
            data["slope"] = self.slope
        if self.kind == "smooth_leaky_relu":
            data.update(alpha=self.alpha, mu=self.mu)
        return data


def make_activation(kind: str, params: Optional[dict[str, float]] = None) -> ActivationSpec:
    """Build an activation from a config name; exact ReLU is rejected"""
    params = dict(params or {})
    if kind == "relu":
        raise UnsupportedActivationError(
            "exact ReLU has a zero derivative on half of the line and no Koopman norm bound; "
            "use leaky_relu or smooth_leaky_relu"
        )
    if kind not in KINDS:
        raise UnsupportedActivationError(f"unsupported activation {kind!r}, expected one of {KINDS}")
    allowed = {"leaky_relu": {"slope"}, "smooth_leaky_relu": {"alpha", "mu"}}.get(kind, set())
    unknown = set(params) - allowed
    if unknown:
        raise ParameterError(f"unknown parameters for {kind}: {sorted(unknown)}")
    return ActivationSpec(kind=kind, **params)  # type: ignore[arg-type]

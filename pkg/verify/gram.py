"""
Kernel Gram matrices k(g_i, g_j) = integral of conj(f(g_i)) f(g_j) over the
input domain, and the isometry consistency check built on them.
"""
import math
import warnings
from dataclasses import dataclass, replace
from typing import Literal, Optional, Sequence, Union

import numpy as np
import pandas as pd

from core.base.errors import DimensionError, KoopboundWarning, ParameterError
from core.base.montecarlo import McConfig, mean_estimate
from core.network.forward import forward
from core.network.spec import HeisenbergElement, NetworkSpec
from utils.parallel import ordered_map

GramMode = Literal["shared", "per_entry"]
AffineElement = tuple[np.ndarray, np.ndarray]
ParameterTuple = Sequence[Union[AffineElement, HeisenbergElement]]

# PSD noise floor relative to the trace
PSD_FLOOR = 1e-3
NEAR_SINGULAR = 1e-6


def instantiate(template: NetworkSpec, g: ParameterTuple) -> NetworkSpec:
    """The template network with its group parameters replaced by ``g``"""
    if template.model_flavor == "heisenberg":
        if len(g) != len(template.layers):
            raise DimensionError(f"{len(g)} group elements for {len(template.layers)} layers")
        return template.with_layers([replace(layer, group=element, domain_tilde=None, domain=None)
                                     for layer, element in zip(template.layers, g)])
    weights = [np.asarray(w, dtype=np.float64) for w, _ in g]
    biases = [np.asarray(b, dtype=np.float64) for _, b in g]
    return template.with_weights(weights, biases)


def _evaluate(task) -> np.ndarray:
    template, g, samples = task
    return forward(instantiate(template, g), samples, check_domain=False)


def _entry(task):
    template, g_i, g_j, mc, i, j = task
    samples, weights = mc.draw("gram", i, j)
    fi = forward(instantiate(template, g_i), samples, check_domain=False)
    fj = forward(instantiate(template, g_j), samples, check_domain=False)
    return mean_estimate(np.conj(fi) * fj * weights, seed=mc.root_seed)


@dataclass(frozen=True, eq=False)
class GramMatrix:
    entries: np.ndarray
    stderr: np.ndarray
    tuples: list
    sample_count: int
    seed: int
    mode: GramMode = "shared"

    @property
    def size(self) -> int:
        return int(self.entries.shape[0])

    def hermitian_excess(self) -> float:
        """max |K_ij - conj K_ji| - 3 combined stderr, <= 0 when Hermitian within noise"""
        defect = np.abs(self.entries - self.entries.conj().T)
        allowance = 3.0 * np.sqrt(self.stderr ** 2 + self.stderr.T ** 2)
        return float(np.max(defect - allowance))

    def symmetrized(self) -> np.ndarray:
        return 0.5 * (self.entries + self.entries.conj().T)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.symmetrized())

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.entries)))

    @property
    def noise_floor(self) -> float:
        return -PSD_FLOOR * self.trace

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues()[0])

    @property
    def psd_ok(self) -> bool:
        return self.min_eigenvalue >= self.noise_floor

    def near_singular(self) -> bool:
        eig = self.eigenvalues()
        return bool(eig[0] <= NEAR_SINGULAR * max(eig[-1], np.finfo(np.float64).tiny))

    def cauchy_schwarz_excess(self) -> float:
        """max |K_ij|^2 - K_ii K_jj - 3 propagated stderr"""
        diag = np.real(np.diag(self.entries))
        se_diag = np.diag(self.stderr)
        lhs = np.abs(self.entries) ** 2
        rhs = np.outer(diag, diag)
        allowance = 3.0 * (2.0 * np.abs(self.entries) * self.stderr
                           + np.outer(se_diag, diag) + np.outer(diag, se_diag))
        return float(np.max(lhs - rhs - allowance))

    def to_frame(self) -> pd.DataFrame:
        n = self.size
        rows = [{"i": i, "j": j, "real": float(self.entries[i, j].real), "imag": float(self.entries[i, j].imag),
                 "stderr": float(self.stderr[i, j])} for i in range(n) for j in range(n)]
        return pd.DataFrame(rows, columns=["i", "j", "real", "imag", "stderr"])


def _tuple_values(template: NetworkSpec, tuples: Sequence[ParameterTuple], samples: np.ndarray,
                  max_workers: Optional[int]) -> list[np.ndarray]:
    return ordered_map(_evaluate, [(template, g, samples) for g in tuples], max_workers)


def _shared_entries(values: list[np.ndarray], weights: np.ndarray, seed: int) -> tuple[np.ndarray, np.ndarray]:
    n = len(values)
    entries = np.zeros((n, n), dtype=np.complex128)
    stderr = np.zeros((n, n))
    for i in range(n):
        left = np.conj(values[i])
        for j in range(n):
            estimate = mean_estimate(left * values[j] * weights, seed=seed)
            entries[i, j] = estimate.value
            stderr[i, j] = estimate.stderr
    return entries, stderr


def gram(template: NetworkSpec, tuples: Sequence[ParameterTuple], mc: McConfig, mode: GramMode = "shared",
         max_workers: Optional[int] = None) -> GramMatrix:
    """
    K[i, j] = integral of conj(f(g_i)) f(g_j).

    ``shared`` evaluates every entry on one sample stream, so K is Hermitian
    and PSD up to rounding; ``per_entry`` gives each entry its own stream.
    """
    n = len(tuples)
    if n < 1:
        raise ParameterError("gram needs at least one parameter tuple")
    entries = np.zeros((n, n), dtype=np.complex128)
    stderr = np.zeros((n, n))
    if mode == "shared":
        samples, weights = mc.draw("gram")
        entries, stderr = _shared_entries(_tuple_values(template, tuples, samples, max_workers), weights, mc.root_seed)
    elif mode == "per_entry":
        tasks = [(template, tuples[i], tuples[j], mc, i, j) for i in range(n) for j in range(n)]
        for (_, _, _, _, i, j), estimate in zip(tasks, ordered_map(_entry, tasks, max_workers)):
            entries[i, j] = estimate.value
            stderr[i, j] = estimate.stderr
    else:
        raise ParameterError(f"unknown gram mode {mode!r}")

    result = GramMatrix(entries=entries, stderr=stderr, tuples=list(tuples), sample_count=mc.sample_count,
                        seed=mc.root_seed, mode=mode)
    if n > 1 and result.near_singular():
        warnings.warn("Gram matrix is near singular (duplicate or collinear tuples?)", KoopboundWarning, stacklevel=2)
    return result


@dataclass(frozen=True)
class IsometryResult:
    residual: float
    threshold: float
    norm_residual: float
    norm_threshold: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.threshold and self.norm_residual <= self.norm_threshold


def isometry_check(template: NetworkSpec, tuples: Sequence[ParameterTuple], coefficients, probe: ParameterTuple,
                   mc: McConfig, independent_streams: bool = False, max_workers: Optional[int] = None) -> IsometryResult:
    """
    Compare direct integrals of the combination sum_i c_i f(g_i) with their
    Gram-linear evaluations:

        <sum c_i f(g_i), f(g')>  vs  sum_i c_i k(g', g_i)
        ||sum c_i f(g_i)||^2     vs  sum_ij conj(c_i) c_j k(g_i, g_j)
    """
    c = np.asarray(coefficients, dtype=np.complex128).reshape(-1)
    if c.size != len(tuples):
        raise DimensionError(f"{c.size} coefficients for {len(tuples)} tuples")
    samples, weights = mc.draw("gram")
    values = _tuple_values(template, list(tuples) + [probe], samples, max_workers)
    probe_values = values[-1]
    values = values[:-1]

    kernel_row = [mean_estimate(np.conj(probe_values) * v * weights, seed=mc.root_seed) for v in values]
    linear = sum(ci * k.value for ci, k in zip(c, kernel_row))
    gram_entries, gram_stderr = _shared_entries(values, weights, mc.root_seed)
    quadratic = complex(np.conj(c) @ gram_entries @ c)

    if independent_streams:
        samples, weights = mc.draw("isometry", "direct")
        values = _tuple_values(template, list(tuples) + [probe], samples, max_workers)
        probe_values = values[-1]
        values = values[:-1]
    combination = np.zeros(samples.shape[0], dtype=np.complex128)
    for ci, v in zip(c, values):
        combination = combination + ci * v
    direct = mean_estimate(np.conj(probe_values) * combination * weights, seed=mc.root_seed)
    norm = mean_estimate(np.abs(combination) ** 2 * weights, seed=mc.root_seed)

    residual = abs(direct.value - linear)
    norm_residual = abs(norm.value - quadratic)
    if independent_streams:
        threshold = 3.0 * math.sqrt(direct.stderr ** 2 + sum(abs(ci) ** 2 * kr.stderr ** 2 for ci, kr in zip(c, kernel_row)))
        spread = float(np.abs(c) @ gram_stderr @ np.abs(c))
        norm_threshold = 3.0 * math.sqrt(norm.stderr ** 2 + spread ** 2)
    else:
        # same samples on both sides: only rounding separates them
        threshold = 1e-10 * (1.0 + float(np.sum(np.abs(c) * np.array([abs(kr.value) for kr in kernel_row]))))
        norm_threshold = 1e-10 * (1.0 + float(np.abs(c) @ np.abs(gram_entries) @ np.abs(c)))
    return IsometryResult(residual=float(residual), threshold=threshold,
                          norm_residual=float(norm_residual), norm_threshold=norm_threshold)


def _haar(rng: np.random.Generator, dim: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def random_affine_tuples(rng: np.random.Generator, count: int, dim: int, depth: int, cap: float = 2.0,
                         shift: float = 0.5) -> list[list[AffineElement]]:
    """
    Random square (W, b) tuples with |det W_l|^{-1/2} <= cap.

    W = Q1 diag(s) Q2 with s uniform in [cap^{-2/dim}, 1.5].
    """
    low = cap ** (-2.0 / dim)
    if low > 1.5:
        raise ParameterError(f"cap {cap} is too small for dimension {dim}")
    tuples = []
    for _ in range(count):
        g = []
        for _ in range(depth):
            s = rng.uniform(low, 1.5, size=dim)
            w = (_haar(rng, dim) * s) @ _haar(rng, dim)
            b = rng.uniform(-shift, shift, size=dim)
            g.append((w, b))
        tuples.append(g)
    return tuples


def random_heisenberg_tuples(rng: np.random.Generator, count: int, dim: int, depth: int,
                             scale: float = 1.0) -> list[list[HeisenbergElement]]:
    return [[HeisenbergElement(rng.uniform(-scale, scale, dim), rng.uniform(-scale, scale, dim),
                               float(rng.uniform(-math.pi, math.pi)))
             for _ in range(depth)] for _ in range(count)]


def random_tuples(template: NetworkSpec, rng: np.random.Generator, count: int, cap: float = 2.0) -> list:
    """Tuples shaped like the template's group parameters"""
    if template.model_flavor == "heisenberg":
        return random_heisenberg_tuples(rng, count, template.input_dim, len(template.layers))
    dims = {layer.in_dim for layer in template.layers if layer.kind == "dense"}
    squares = all(layer.kind == "dense" and layer.in_dim == layer.out_dim for layer in template.layers)
    if len(dims) != 1 or not squares:
        raise DimensionError("random affine tuples need square dense layers of one width")
    return random_affine_tuples(rng, count, dims.pop(), len(template.layers), cap)

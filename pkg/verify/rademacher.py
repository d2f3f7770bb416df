"""
Empirical Rademacher complexity of finite candidate sets,

    R^(F, x_1..x_S) = E_eps[ sup_{F in F} sum_s F(x_s) eps_s ] / S,

with real +-1 signs. The sup runs over N sampled candidates, so every
estimate is a lower estimate of the sup over the full class.
"""
import math
from dataclasses import dataclass, replace
from typing import Callable, Literal, Optional, Sequence

import numpy as np

from core.base.errors import ParameterError
from core.bounds.theorems import bound_thm2, thm1_for_spec
from core.network.domains import propagate_domains
from core.network.forward import forward
from core.network.regularized import Regularizer
from core.network.spec import NetworkSpec
from utils.parallel import ordered_map
from utils.rng import stream
from verify.gram import instantiate, random_affine_tuples

RademacherMode = Literal["mc_search", "exact_enumeration"]
MAX_EXACT_SAMPLES = 16

Evaluable = Callable[[np.ndarray], np.ndarray]
ClassSampler = Callable[[np.random.Generator, int], Sequence[Evaluable]]


@dataclass(frozen=True)
class RademacherEstimate:
    value: float
    draws: int
    candidate_count: int
    mode: RademacherMode
    stderr: float
    seed: int

    def to_json(self) -> dict:
        return {"value": self.value, "draws": self.draws, "candidate_count": self.candidate_count,
                "mode": self.mode, "stderr": self.stderr, "seed": self.seed}


def sign_patterns(sample_size: int) -> np.ndarray:
    """All 2^S sign vectors, shape (2^S, S)"""
    codes = np.arange(2 ** sample_size)[:, None]
    return ((codes >> np.arange(sample_size)) & 1) * 2.0 - 1.0


def empirical_rademacher(values: np.ndarray, draws: int = 200, mode: RademacherMode = "mc_search",
                         seed: int = 0) -> RademacherEstimate:
    """
    Args:
        values: candidate evaluations F_k(x_s), shape (N, S)
        draws: number of sign draws M (mc_search)
        mode: mc_search averages M random sign vectors, exact_enumeration all 2^S
        seed: root seed of the sign stream
    """
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    n, sample_size = values.shape
    if sample_size == 0:
        raise ParameterError("empirical Rademacher complexity needs S >= 1 inputs")
    if n == 0:
        raise ParameterError("empirical Rademacher complexity needs at least one candidate")
    if mode == "exact_enumeration":
        if sample_size > MAX_EXACT_SAMPLES:
            raise ParameterError(f"exact enumeration is limited to S <= {MAX_EXACT_SAMPLES}, got {sample_size}")
        signs = sign_patterns(sample_size)
    elif mode == "mc_search":
        if draws < 1:
            raise ParameterError(f"draws must be >= 1, got {draws}")
        signs = stream(seed, "rademacher", "signs").choice(np.array([-1.0, 1.0]), size=(draws, sample_size))
    else:
        raise ParameterError(f"unknown mode {mode!r}")

    sups = np.max(signs @ values.T, axis=1) / sample_size
    value = float(np.mean(sups))
    stderr = float(np.std(sups, ddof=1) / math.sqrt(sups.size)) if mode == "mc_search" and sups.size > 1 else 0.0
    return RademacherEstimate(value=value, draws=int(signs.shape[0]), candidate_count=n, mode=mode,
                              stderr=stderr, seed=seed)


def candidate_values(sampler: ClassSampler, inputs: np.ndarray, candidates: int, seed: int) -> np.ndarray:
    """Evaluate ``candidates`` members drawn by ``sampler`` on the inputs"""
    functions = sampler(stream(seed, "rademacher", "candidates"), candidates)
    inputs = np.atleast_2d(inputs)
    return np.stack([np.asarray(f(inputs), dtype=np.float64).reshape(-1) for f in functions])


def estimate_rademacher(sampler: ClassSampler, inputs: np.ndarray, draws: int, candidates: int,
                        mode: RademacherMode = "mc_search", seed: int = 0) -> RademacherEstimate:
    return empirical_rademacher(candidate_values(sampler, inputs, candidates, seed), draws, mode, seed)


# -- the regularized affine-scaled class ------------------------------------

def regularized_values(spec: NetworkSpec, inputs: np.ndarray, width: float, noise: np.ndarray) -> np.ndarray:
    """
    F_c(x_s) for every input, sharing the standard normal draws ``noise``
    (shape (n, d)) across inputs and candidates.
    """
    p = Regularizer(np.zeros(spec.input_dim), width)
    scale = 1.0 / math.sqrt(2.0 * width)
    points = (inputs[:, None, :] + scale * noise[None, :, :]).reshape(-1, spec.input_dim)
    values = np.real(forward(spec, points, check_domain=False)).reshape(inputs.shape[0], noise.shape[0])
    return p.constant * values.mean(axis=1)


def _class_member(task) -> tuple[np.ndarray, np.ndarray, float, float]:
    template, g, inputs, width, noise, sample_size, cap = task
    spec = propagate_domains(instantiate(template, g))
    plain = replace(spec, model_flavor="plain")
    thm2 = bound_thm2(spec, sample_size, cap=cap)
    return (regularized_values(spec, inputs, width, noise), regularized_values(plain, inputs, width, noise),
            thm1_for_spec(spec, sample_size).value, thm2.class_value)


@dataclass(frozen=True)
class ClassSample:
    """
    Both function classes over the same weight tuples.

    affine_values are F_c(g, x_s) of the determinant-scaled network, plain_values
    the unscaled NN_c(g, x_s) = F_c(g, x_s) prod |det W_l|^{-1/2}.
    """
    affine_values: np.ndarray   # (N, S)
    plain_values: np.ndarray    # (N, S)
    thm1_values: np.ndarray     # (N,)
    thm2_values: np.ndarray     # (N,) thm2 over the cap ball
    tuples: list

    @property
    def thm1_bound(self) -> float:
        return float(np.max(self.thm1_values))

    @property
    def thm2_bound(self) -> float:
        return float(np.max(self.thm2_values))


def sample_affine_class(template: NetworkSpec, inputs: np.ndarray, candidates: int, width: float, cap: float,
                        seed: int, noise_samples: int = 256, max_workers: Optional[int] = None) -> ClassSample:
    """F_c and NN_c over random affine tuples with |det W_l|^{-1/2} <= cap, with each member's bounds"""
    if template.model_flavor != "affine_scaled":
        raise ParameterError(f"class template must be affine_scaled, got {template.model_flavor}")
    dim = template.input_dim
    tuples = random_affine_tuples(stream(seed, "rademacher", "candidates"), candidates, dim, len(template.layers), cap)
    noise = stream(seed, "rademacher", "noise").standard_normal((noise_samples, dim))
    tasks = [(template, g, inputs, width, noise, inputs.shape[0], cap) for g in tuples]
    results = ordered_map(_class_member, tasks, max_workers)
    return ClassSample(affine_values=np.stack([r[0] for r in results]), plain_values=np.stack([r[1] for r in results]),
                       thm1_values=np.array([r[2] for r in results]), thm2_values=np.array([r[3] for r in results]),
                       tuples=tuples)

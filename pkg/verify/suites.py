"""
Property suites behind `verify --suite`.

Each suite returns a VerificationReport; every check draws from its own
named stream of the root seed, so adding a check never perturbs the others.
"""
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from core.activations.catalogue import make_activation
from core.activations.koopman import koopman_norm, koopman_norm_generic
from core.base.domain import DomainBox
from core.base.errors import ConstraintViolationError, ParameterError
from core.base.montecarlo import gaussian_config, uniform_config
from core.bounds.theorems import bound_thm2, bound_thm3, bound_thm4, thm1_for_spec
from core.linalg.circulant import beta, convolution_matrix, pool_matrix
from core.linalg.determinants import det_factor_invertible
from core.linalg.svd import svd
from core.network.domains import propagate_domains
from core.network.forward import as_function
from core.network.regularized import Regularizer
from core.network.spec import FinalTransform, NetworkSpec, dense_layer
from utils.common import log
from utils.parallel import ordered_map
from utils.rng import stream, stream_seed
from verify.gram import gram, instantiate, isometry_check, random_affine_tuples
from verify.integrals import gaussian_overlap, l2_inner, l2_norm_sq
from verify.lemmas import koopman_lemma_check, leaky_relu_witness
from verify.rademacher import empirical_rademacher, sample_affine_class
from verify.report import CheckResult, VerificationReport

SUITES = ("lemmas", "gram", "rademacher", "bounds", "all")

LEMMA_ACTIVATIONS = (
    ("tanh", {}),
    ("sigmoid", {}),
    ("leaky_relu", {"slope": 0.1}),
    ("leaky_relu", {"slope": 0.5}),
    ("leaky_relu", {"slope": 2.0}),
    ("smooth_leaky_relu", {"alpha": 0.1, "mu": 0.5}),
)


@dataclass(frozen=True)
class SuiteSizes:
    lemma_trials: int = 200
    lemma_samples: int = 20_000
    gram_samples: int = 200_000
    gram_tuples: int = 8
    per_entry_tuples: int = 4
    overlap_pairs: int = 20
    rademacher_candidates: int = 1000
    rademacher_draws: int = 200
    rademacher_samples: int = 50
    noise_samples: int = 256
    direct_candidates: int = 50
    direct_samples: int = 20_000
    bound_specs: int = 20

    @classmethod
    def quick(cls) -> "SuiteSizes":
        return cls(lemma_trials=20, lemma_samples=4000, gram_samples=20_000, gram_tuples=4, per_entry_tuples=3,
                   overlap_pairs=5, rademacher_candidates=100, rademacher_draws=100, rademacher_samples=20,
                   noise_samples=64, direct_candidates=10, direct_samples=4000, bound_specs=5)


def affine_template(dim: int = 2, depth: int = 2, activation: str = "tanh") -> NetworkSpec:
    """Square affine-scaled network: activations on every layer but the last, v = gaussian_bump(1)"""
    layers = [dense_layer(np.eye(dim), activation=make_activation(activation) if k < depth - 1 else None)
              for k in range(depth)]
    return NetworkSpec(input_domain=DomainBox.cube(-1.0, 1.0, dim), layers=tuple(layers),
                       final=FinalTransform("gaussian_bump"), model_flavor="affine_scaled")


def _relative(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), np.finfo(np.float64).tiny)


# -- lemmas -------------------------------------------------------------------

def _lemma_case(task) -> CheckResult:
    kind, params, dim, trials, samples, seed = task
    activation = make_activation(kind, params)
    box = DomainBox.cube(-1.0, 1.0, dim)
    bound = koopman_norm(activation, box)
    mc = uniform_config(box, samples, seed)
    check = koopman_lemma_check(activation, box, bound, trials, mc)
    statistic = float(np.max(check.ratios - 3.0 * check.stderrs))
    label = kind + ("(" + ", ".join(f"{k}={v}" for k, v in sorted(params.items())) + ")" if params else "")
    return CheckResult.at_most(f"lemma {label} d={dim}", statistic, bound.value * (1.0 + 1e-12), seed,
                               f"max ratio {check.max_ratio:.6g} over {trials} trials")


def lemma_suite(seed: int, sizes: SuiteSizes, max_workers: Optional[int] = None) -> VerificationReport:
    report = VerificationReport("lemmas", seed)
    tasks = [(kind, params, dim, sizes.lemma_trials, sizes.lemma_samples,
              stream_seed(seed, "lemmas", kind, repr(sorted(params.items())), dim))
             for kind, params in LEMMA_ACTIVATIONS for dim in (1, 2, 3)]
    report.checks.extend(ordered_map(_lemma_case, tasks, max_workers))

    for slope in (0.1, 0.5):
        for dim in (1, 2):
            case_seed = stream_seed(seed, "lemmas", "witness", slope, dim)
            mc = uniform_config(DomainBox.cube(-1.0, 0.0, dim), sizes.lemma_samples, case_seed)
            ratio = leaky_relu_witness(slope, dim, mc).ratio
            report.checks.append(CheckResult.at_least(f"leaky_relu witness a={slope} d={dim}", ratio,
                                                      0.95 * slope ** (-dim / 2.0), case_seed))

    tanh = make_activation("tanh")
    for b in (0.5, 1.0, 2.0):
        for dim in (1, 2, 3):
            numeric = koopman_norm_generic(tanh, DomainBox.cube(-b, b, dim)).value
            report.checks.append(CheckResult.at_most(f"tanh closed form b={b} d={dim}",
                                                     abs(numeric - math.cosh(b) ** dim), 1e-6, seed))

    rng = stream(seed, "lemmas", "beta")
    for n in range(1, 9):
        theta = rng.standard_normal(n)
        dense_det = abs(float(np.linalg.det(convolution_matrix(theta))))
        report.checks.append(CheckResult.at_most(f"beta vs convolution determinant |I|={n}",
                                                 _relative(abs(beta(theta)), dense_det), 1e-8, seed))

    for window in (2, 4):
        result = svd(pool_matrix((8,), (window,)))
        deviation = float(np.max(np.abs(result.nonzero_singular_values - 1.0)))
        report.checks.append(CheckResult.at_most(f"pooling singular values m={window}", deviation, 1e-10, seed,
                                                 f"rank {result.numerical_rank}"))
    return report


# -- gram ---------------------------------------------------------------------

def gram_suite(seed: int, sizes: SuiteSizes, max_workers: Optional[int] = None) -> VerificationReport:
    report = VerificationReport("gram", seed)
    template = affine_template()
    tuples = random_affine_tuples(stream(seed, "gram", "tuples"), sizes.gram_tuples, 2, 2)
    mc = uniform_config(template.input_domain, sizes.gram_samples, stream_seed(seed, "gram"))

    k = gram(template, tuples, mc, max_workers=max_workers)
    report.checks.append(CheckResult.at_most("gram hermitian (shared stream)", k.hermitian_excess(), 0.0, mc.root_seed))
    report.checks.append(CheckResult.at_least("gram psd", k.min_eigenvalue, k.noise_floor, mc.root_seed,
                                              f"trace {k.trace:.6g}"))
    report.checks.append(CheckResult.at_most("gram cauchy-schwarz", k.cauchy_schwarz_excess(), 0.0, mc.root_seed))

    split = gram(template, tuples[: sizes.per_entry_tuples], mc, mode="per_entry", max_workers=max_workers)
    report.checks.append(CheckResult.at_most("gram hermitian (per-entry streams)", split.hermitian_excess(), 0.0,
                                             mc.root_seed))

    single = isometry_check(template, tuples[:1], [1.0], tuples[0], mc, max_workers=max_workers)
    report.checks.append(CheckResult.at_most("isometry single tuple", single.residual, single.threshold, mc.root_seed))
    pair = isometry_check(template, tuples[:2], [0.7, -1.3], tuples[2 % len(tuples)], mc,
                          independent_streams=True, max_workers=max_workers)
    report.checks.append(CheckResult.at_most("isometry independent streams", pair.residual, pair.threshold, mc.root_seed))
    report.checks.append(CheckResult.at_most("isometry norm", pair.norm_residual, pair.norm_threshold, mc.root_seed))

    rng = stream(seed, "gram", "overlap")
    worst = 0.0
    for pair_index in range(sizes.overlap_pairs):
        x, y = rng.uniform(-1.0, 1.0, size=(2, 2))
        px, py = Regularizer(x, 1.0), Regularizer(y, 1.0)
        overlap_mc = gaussian_config(0.5 * (x + y), 2.0, sizes.gram_samples // 10, stream_seed(seed, "overlap", pair_index))
        estimate = l2_inner(px, py, overlap_mc)
        worst = max(worst, abs(estimate.value - gaussian_overlap(x, y, 1.0)))
    report.checks.append(CheckResult.at_most("gaussian overlap", worst, 1e-2, seed, f"{sizes.overlap_pairs} pairs"))

    for width in (1.0, 10.0, 100.0):
        for dim in (1, 2, 3):
            center = np.zeros(dim)
            norm_mc = gaussian_config(center, width, sizes.gram_samples // 10, stream_seed(seed, "unit_norm", width, dim))
            estimate = l2_norm_sq(Regularizer(center, width), norm_mc)
            report.checks.append(CheckResult.at_most(f"regularizer unit norm c={width:g} d={dim}",
                                                     abs(estimate.value - 1.0), 3.0 * estimate.stderr + 1e-12,
                                                     norm_mc.root_seed))
    return report


# -- rademacher ---------------------------------------------------------------

def rademacher_suite(seed: int, sizes: SuiteSizes, max_workers: Optional[int] = None, cap: float = 2.0,
                     width: float = 1.0) -> VerificationReport:
    report = VerificationReport("rademacher", seed)

    singleton = stream(seed, "rademacher", "singleton").standard_normal((1, 8))
    zero = empirical_rademacher(singleton, mode="exact_enumeration", seed=seed)
    report.checks.append(CheckResult.at_most("singleton class", abs(zero.value), 1e-12, seed))

    theta = np.linspace(-1.0, 1.0, 201)
    line = empirical_rademacher(np.outer(theta, [1.0, 1.0]), mode="exact_enumeration", seed=seed)
    report.checks.append(CheckResult.at_most("linear class on x=(1,1)", abs(line.value - 0.5), 1e-12, seed))

    template = affine_template()
    inputs = template.input_domain.sample(stream(seed, "rademacher", "inputs"), sizes.rademacher_samples)
    sample = sample_affine_class(template, inputs, sizes.rademacher_candidates, width, cap, seed,
                                 noise_samples=sizes.noise_samples, max_workers=max_workers)
    affine = empirical_rademacher(sample.affine_values, sizes.rademacher_draws, "mc_search", seed)
    report.checks.append(CheckResult.at_most("empirical ≤ thm1 bound (affine_scaled class)", affine.value,
                                             sample.thm1_bound, seed, f"empirical={affine.value:.6g} thm1 bound={sample.thm1_bound:.6g}"))
    plain = empirical_rademacher(sample.plain_values, sizes.rademacher_draws, "mc_search", seed)
    report.checks.append(CheckResult.at_most(f"empirical ≤ thm2 bound (plain class, D={cap:g})", plain.value,
                                             sample.thm2_bound, seed, f"empirical={plain.value:.6g} thm2 bound={sample.thm2_bound:.6g}"))

    shared = sample.plain_values[:, :8]
    exact = empirical_rademacher(shared, mode="exact_enumeration", seed=seed)
    search = empirical_rademacher(shared, sizes.rademacher_draws, "mc_search", seed)
    report.checks.append(CheckResult.at_most("mc_search vs exact_enumeration (S=8)", abs(search.value - exact.value),
                                             max(0.05 * abs(exact.value), 3.0 * search.stderr), seed,
                                             f"mc={search.value:.6g} exact={exact.value:.6g}"))

    worst = -math.inf
    direct_mc = uniform_config(template.input_domain, sizes.direct_samples, stream_seed(seed, "rademacher", "direct"))
    for g in sample.tuples[: sizes.direct_candidates]:
        spec = propagate_domains(instantiate(template, g))
        norm_sq = l2_norm_sq(as_function(spec), direct_mc)
        norm = math.sqrt(max(norm_sq.value, 0.0))
        stderr = norm_sq.stderr / (2.0 * norm) if norm > 0 else 0.0
        worst = max(worst, norm - 3.0 * stderr - thm1_for_spec(spec, 1).value)
    report.checks.append(CheckResult.at_most("||f(g)|| <= prod ||A_l|| ||v||", worst, 0.0, direct_mc.root_seed,
                                             f"{sizes.direct_candidates} tuples"))
    return report


# -- bounds -------------------------------------------------------------------

def _random_plain_spec(rng: np.random.Generator, orthogonal: bool) -> NetworkSpec:
    dim = int(rng.integers(2, 4))
    depth = int(rng.integers(2, 4))
    layers = []
    for k in range(depth):
        if orthogonal:
            q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
            w = q * np.sign(np.diag(r))
        else:
            w = rng.standard_normal((dim, dim)) + 2.0 * np.eye(dim)
        layers.append(dense_layer(w, rng.uniform(-0.2, 0.2, dim) if not orthogonal else None,
                                  make_activation("tanh") if k < depth - 1 else None))
    spec = NetworkSpec(input_domain=DomainBox.cube(-1.0, 1.0, dim), layers=tuple(layers),
                       final=FinalTransform("gaussian_bump", w3=float(rng.uniform(0.5, 2.0))))
    return propagate_domains(spec)


def bounds_suite(seed: int, sizes: SuiteSizes, max_workers: Optional[int] = None) -> VerificationReport:
    report = VerificationReport("bounds", seed)
    rng = stream(seed, "bounds", "specs")
    worst_34 = 0.0
    worst_31 = 0.0
    for _ in range(sizes.bound_specs):
        spec = _random_plain_spec(rng, orthogonal=False)
        t3 = bound_thm3(spec, 100, alpha_mode="conservative").value
        t4 = bound_thm4(spec, 100, alpha_mode="conservative").value
        worst_34 = max(worst_34, _relative(t4, t3))
        ortho = _random_plain_spec(rng, orthogonal=True)
        worst_31 = max(worst_31, _relative(bound_thm3(ortho, 100, alpha_mode="conservative").value,
                                           thm1_for_spec(ortho, 100).value))
    report.checks.append(CheckResult.at_most("thm4 == thm3 on full-rank specs", worst_34, 1e-10, seed))
    report.checks.append(CheckResult.at_most("thm3 == thm1 on orthogonal specs", worst_31, 1e-10, seed))

    spec = _random_plain_spec(rng, orthogonal=False)
    base = thm1_for_spec(spec, 1).value
    worst = max(_relative(thm1_for_spec(spec, s).value * math.sqrt(s), base) for s in (4, 100, 12345))
    report.checks.append(CheckResult.at_most("S^(-1/2) scaling", worst, 1e-12, seed))

    worst = 0.0
    for dim in (2, 3, 5):
        w = rng.standard_normal((dim, dim)) + 2.0 * np.eye(dim)
        for c in (0.5, 2.0, 3.7):
            ratio = det_factor_invertible(c * w) / det_factor_invertible(w)
            worst = max(worst, _relative(ratio, c ** (-dim / 2.0)))
    report.checks.append(CheckResult.at_most("det factor scaling c^(-d/2)", worst, 1e-10, seed))

    try:
        bound_thm2(affine_template().with_weights([0.5 * np.eye(2), np.eye(2)]), 100, cap=1.0)
        rejected = 0.0
    except ConstraintViolationError:
        rejected = 1.0
    report.checks.append(CheckResult.at_least("cap violation rejected", rejected, 1.0, seed))
    return report


SUITE_FUNCTIONS: dict[str, Callable[..., VerificationReport]] = {
    "lemmas": lemma_suite,
    "gram": gram_suite,
    "rademacher": rademacher_suite,
    "bounds": bounds_suite,
}


def run_suite(name: str, seed: int, sizes: Optional[SuiteSizes] = None,
              max_workers: Optional[int] = None) -> VerificationReport:
    if name not in SUITES:
        raise ParameterError(f"unknown suite {name!r}, expected one of {SUITES}")
    sizes = sizes or SuiteSizes()
    if name != "all":
        log(f"running suite {name} (seed {seed})")
        return SUITE_FUNCTIONS[name](seed, sizes, max_workers)
    report = VerificationReport("all", seed)
    for suite in ("lemmas", "gram", "rademacher", "bounds"):
        log(f"running suite {suite} (seed {seed})")
        report.extend(SUITE_FUNCTIONS[suite](seed, sizes, max_workers))
    return report

__all__ = [
    "CheckResult", "VerificationReport",
    "l2_inner", "l2_norm_sq", "gaussian_overlap",
    "GramMatrix", "gram", "isometry_check", "instantiate", "random_affine_tuples", "random_tuples",
    "koopman_lemma_check", "leaky_relu_witness", "koopman_ratio", "GaussianMixture",
    "RademacherEstimate", "empirical_rademacher", "estimate_rademacher", "sample_affine_class",
    "SuiteSizes", "run_suite", "affine_template", "SUITES",
]

from .report import CheckResult, VerificationReport
from .integrals import l2_inner, l2_norm_sq, gaussian_overlap
from .gram import GramMatrix, gram, isometry_check, instantiate, random_affine_tuples, random_tuples
from .lemmas import koopman_lemma_check, leaky_relu_witness, koopman_ratio, GaussianMixture
from .rademacher import RademacherEstimate, empirical_rademacher, estimate_rademacher, sample_affine_class
from .suites import SuiteSizes, run_suite, affine_template, SUITES

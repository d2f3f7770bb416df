"""
测试随机流、Monte-Carlo 估计与 L2 内积
"""
import math

import numpy as np
import pytest

from core.base.domain import DomainBox
from core.base.errors import DegenerateDomainError, KoopboundWarning, ParameterError
from core.base.montecarlo import McConfig, gaussian_config, mean_estimate, uniform_config
from core.network import Regularizer
from utils.rng import stream, stream_seed
from verify.integrals import gaussian_overlap, l2_inner, l2_norm_sq


def test_streams_are_reproducible():
    a = stream(7, "gram", 1, 2).standard_normal(16)
    b = stream(7, "gram", 1, 2).standard_normal(16)
    c = stream(7, "gram", 2, 1).standard_normal(16)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert stream_seed(7, "alpha") == stream_seed(7, "alpha")
    assert stream_seed(7, "alpha") != stream_seed(8, "alpha")


def test_mean_estimate():
    estimate = mean_estimate(np.array([1.0, 3.0]), seed=0, scale=2.0)
    assert estimate.value == pytest.approx(4.0)
    assert estimate.stderr == pytest.approx(2.0 * math.sqrt(2.0) / math.sqrt(2.0))
    assert estimate.within(4.0)
    with pytest.raises(ParameterError):
        mean_estimate(np.array([1.0]), seed=0)


def test_complex_mean_estimate():
    estimate = mean_estimate(np.array([1j, 1j, 1j]), seed=0)
    assert estimate.value == 1j
    assert estimate.stderr == 0.0
    assert estimate.to_json()["value"] == [0.0, 1.0]


def test_config_validation():
    with pytest.raises(ParameterError):
        uniform_config(DomainBox.cube(0.0, 1.0, 2), 10, 0)
    with pytest.raises(DegenerateDomainError):
        uniform_config(DomainBox(np.array([0.0, 0.0]), np.array([1.0, 0.0])), 1000, 0)
    with pytest.raises(DegenerateDomainError):
        gaussian_config(np.zeros(2), 0.0, 1000, 0)


def test_identical_config_identical_draws():
    mc = uniform_config(DomainBox.cube(-1.0, 1.0, 3), 500, 123)
    first, w1 = mc.draw("x")
    second, w2 = McConfig(500, 123, mc.proposal).draw("x")
    assert np.array_equal(first, second)
    assert np.array_equal(w1, w2)
    assert np.allclose(w1, 8.0)
    child, _ = mc.child("sub").draw("x")
    assert not np.array_equal(first, child)


def test_unit_gaussian_self_inner():
    p = Regularizer(np.array([0.3, -0.2]), 1.0)
    mc = gaussian_config(p.center, 2.0, 2000, 0)
    assert l2_inner(p, p, mc).within(1.0, floor=1e-9)


def test_gaussian_overlap_inner():
    x = np.array([0.0, 0.0])
    y = np.array([1.0, 1.0])
    px = Regularizer(x, 1.0)
    py = Regularizer(y, 1.0)
    assert gaussian_overlap(x, y, 1.0) == pytest.approx(math.exp(-1.0))
    exact = l2_inner(px, py, gaussian_config(0.5 * (x + y), 2.0, 2000, 1))
    assert exact.within(math.exp(-1.0), floor=1e-9)
    noisy = l2_inner(px, py, gaussian_config(0.5 * (x + y), 1.0, 50_000, 2))
    assert noisy.within(math.exp(-1.0))


def test_odd_even_inner_vanishes():
    odd = lambda points: points[:, 0] * np.exp(-np.sum(points ** 2, axis=1))
    even = lambda points: np.exp(-np.sum(points ** 2, axis=1))
    estimate = l2_inner(odd, even, gaussian_config(np.zeros(2), 1.0, 20_000, 3))
    assert estimate.within(0.0, k=4.0)


def test_norm_of_box_indicator():
    one = lambda points: np.ones(points.shape[0])
    estimate = l2_norm_sq(one, uniform_config(DomainBox.cube(0.0, 2.0, 3), 1000, 0))
    assert estimate.value == pytest.approx(8.0)


def test_coverage_warning():
    narrow = Regularizer(np.zeros(2), 10.0)
    with pytest.warns(KoopboundWarning, match="support"):
        l2_norm_sq(narrow, uniform_config(DomainBox.cube(-50.0, 50.0, 2), 1000, 0))

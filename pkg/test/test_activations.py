"""
测试激活函数目录与 Koopman 范数界
"""
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from core.activations import (
    koopman_norm,
    koopman_norm_generic,
    koopman_norm_leaky_relu,
    koopman_norm_sigmoid,
    koopman_norm_tanh,
    make_activation,
    shift_koopman_norm,
)
from core.base.domain import DomainBox
from core.base.errors import ParameterError, UnsupportedActivationError


def test_relu_is_rejected():
    with pytest.raises(UnsupportedActivationError, match="leaky_relu"):
        make_activation("relu")


def test_bad_parameters():
    with pytest.raises(ParameterError):
        make_activation("leaky_relu", {"slope": 0.0})
    with pytest.raises(ParameterError):
        make_activation("smooth_leaky_relu", {"alpha": 1.5, "mu": 0.5})


def test_smooth_leaky_relu_shape():
    sigma = make_activation("smooth_leaky_relu", {"alpha": 0.1, "mu": 0.5})
    assert sigma(np.array([0.0]))[0] == pytest.approx(0.0, abs=1e-15)
    x = np.linspace(-5.0, 5.0, 101)
    slope = sigma.derivative(x)
    assert np.all(slope > 0.1) and np.all(slope < 1.0)
    # leaky ReLU limit for small mu
    sharp = make_activation("smooth_leaky_relu", {"alpha": 0.1, "mu": 1e-4})
    assert_allclose(sharp(np.array([-2.0, 3.0])), [-0.2, 3.0], atol=1e-3)


def test_inverses_round_trip():
    x = np.linspace(-3.0, 3.0, 61)
    for kind, params in [("tanh", {}), ("sigmoid", {}), ("leaky_relu", {"slope": 0.3}),
                         ("smooth_leaky_relu", {"alpha": 0.1, "mu": 0.5})]:
        sigma = make_activation(kind, params)
        assert_allclose(sigma.inverse(sigma(x)), x, atol=1e-9)


def test_tanh_bound():
    assert koopman_norm_tanh(DomainBox.cube(-1.0, 1.0, 1)).value == pytest.approx(math.cosh(1.0), rel=1e-12)
    assert koopman_norm_tanh(DomainBox.cube(0.0, 0.0, 1)).value == pytest.approx(1.0)
    assert koopman_norm_tanh(DomainBox.cube(-1.0, 1.0, 2)).value == pytest.approx(math.cosh(1.0) ** 2, rel=1e-12)


def test_tanh_bound_matches_grid():
    for b in (0.5, 1.0, 2.0):
        box = DomainBox.cube(-b, b, 1)
        closed = koopman_norm_tanh(box).value
        grid = koopman_norm_generic(make_activation("tanh"), box).value
        assert closed == pytest.approx(math.cosh(b), rel=1e-12)
        assert grid == pytest.approx(closed, abs=1e-6)


def test_sigmoid_bound():
    assert koopman_norm_sigmoid(DomainBox.cube(0.0, 0.0, 1)).value == pytest.approx(2.0)
    x = 1.0 / (1.0 + math.exp(-1.0))
    assert koopman_norm_sigmoid(DomainBox.cube(-1.0, 1.0, 1)).value == pytest.approx(math.sqrt(1.0 / (x - x * x)), rel=1e-10)
    assert koopman_norm_sigmoid(DomainBox.cube(-1.0, 1.0, 1)).value == pytest.approx(2.2553, abs=1e-4)
    assert koopman_norm_sigmoid(DomainBox.cube(0.0, 0.0, 2)).value == pytest.approx(4.0)


def test_leaky_relu_bound():
    assert koopman_norm_leaky_relu(1.0, 5).value == pytest.approx(1.0)
    assert koopman_norm_leaky_relu(0.5, 3).value == pytest.approx(math.sqrt(8.0))
    assert koopman_norm_leaky_relu(2.0, 4).value == pytest.approx(1.0)


def test_generic_bound():
    identity = koopman_norm(make_activation("identity"), DomainBox.cube(-3.0, 3.0, 2))
    assert identity.value == pytest.approx(1.0)
    smooth = make_activation("smooth_leaky_relu", {"alpha": 0.1, "mu": 0.5})
    value = koopman_norm(smooth, DomainBox.cube(-2.0, 2.0, 1)).value
    assert 1.0 <= value <= 1.0 / math.sqrt(0.1)
    # the sup sits at the negative endpoint, where the slope is smallest
    assert value == pytest.approx(math.sqrt(1.0 / float(smooth.derivative(np.array([-2.0]))[0])), rel=1e-8)


def test_shift_factor():
    assert shift_koopman_norm() == 1.0
    tanh_bound = koopman_norm_tanh(DomainBox.cube(-1.0, 1.0, 1)).value
    assert shift_koopman_norm() ** 3 * tanh_bound == pytest.approx(tanh_bound)

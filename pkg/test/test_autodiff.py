"""
测试反向传播的各个算子与优化器
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from core.base.errors import ParameterError
from train import autodiff as ad
from train.optim import SGD, Adam
from train.runner import grad_check
from utils.rng import stream

TOLERANCE = 1e-6


def _random(shape, name, seed=0):
    return ad.parameter(stream(seed, "autodiff", name).standard_normal(shape), name)


def test_quadratic_gradient():
    a = stream(0, "quad").standard_normal((4, 3))
    b = stream(1, "quad").standard_normal(4)
    x = ad.parameter(stream(2, "quad").standard_normal(3), "x")
    loss = ((ad.Tensor(a) @ x - b) ** 2).sum()
    loss.backward()
    assert_allclose(x.grad, 2.0 * a.T @ (a @ x.data - b), rtol=1e-12)
    assert grad_check([x], lambda: ((ad.Tensor(a) @ x - b) ** 2).sum()) <= TOLERANCE


def test_shared_node_accumulates():
    x = ad.parameter(np.array([1.5, -2.0]), "x")
    y = x * x + x
    y.sum().backward()
    assert_allclose(x.grad, 2.0 * x.data + 1.0)


def test_broadcast_bias():
    x = ad.Tensor(stream(0, "bias").standard_normal((5, 3)))
    b = ad.parameter(np.zeros(3), "b")
    (x + b).sum().backward()
    assert_allclose(b.grad, np.full(3, 5.0))


@pytest.mark.parametrize("op", [ad.exp, ad.tanh, ad.sigmoid, ad.softplus, ad.logcosh])
def test_elementwise_gradients(op):
    x = _random((3, 2), "x")
    assert grad_check([x], lambda: (op(x) * x).sum()) <= TOLERANCE


def test_log_and_division():
    x = ad.parameter(np.array([0.5, 1.5, 3.0]), "x")
    assert grad_check([x], lambda: (ad.log(x) / (x + 1.0)).sum()) <= TOLERANCE
    assert grad_check([x], lambda: (1.0 / x - 2.0 * x).mean()) <= TOLERANCE


def test_absolute_and_inf_norm():
    x = ad.parameter(np.array([[0.3, -1.7], [0.9, -0.2]]), "x")
    assert ad.inf_norm(x).item() == pytest.approx(1.7)
    ad.inf_norm(x).backward()
    assert_allclose(x.grad, [[0.0, -1.0], [0.0, 0.0]])
    assert grad_check([x], lambda: ad.absolute(x).sum(axis=1).sum()) <= TOLERANCE


def test_matmul_and_transpose():
    w = _random((3, 4), "w")
    v = _random((4, 2), "v")
    assert grad_check([w, v], lambda: ad.tanh(w @ v).T.sum()) <= TOLERANCE


def test_log_gram_det():
    w = _random((5, 3), "w")
    u, s, vt = np.linalg.svd(w.data, full_matrices=False)
    value = ad.log_gram_det(w)
    assert value.item() == pytest.approx(np.log(np.linalg.det(w.data.T @ w.data)))
    assert grad_check([w], lambda: ad.log_gram_det(w)) <= 1e-5


def test_spectral_norm():
    w = ad.parameter(np.diag([3.0, 1.0, 0.5]) + 0.1 * stream(0, "spectral").standard_normal((3, 3)), "w")
    assert ad.spectral_norm(w).item() == pytest.approx(np.linalg.norm(w.data, 2))
    assert grad_check([w], lambda: ad.spectral_norm(w)) <= 1e-5


def test_cross_entropy():
    logits = _random((6, 4), "logits")
    labels = np.array([0, 1, 2, 3, 1, 0])
    loss = ad.cross_entropy(logits, labels)
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    log_p = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    assert loss.item() == pytest.approx(-log_p[np.arange(6), labels].mean())
    assert grad_check([logits], lambda: ad.cross_entropy(logits, labels)) <= TOLERANCE


def test_constants_do_not_track():
    a = ad.Tensor(np.ones(3))
    out = ad.exp(a) * 2.0
    assert not out.requires_grad
    assert out.grad is None


def test_sgd_step():
    p = ad.parameter(np.array([1.0, 2.0]), "p")
    optimizer = SGD([p], lr=0.1)
    (p * p).sum().backward()
    optimizer.step()
    assert_allclose(p.data, [0.8, 1.6])
    optimizer.zero_grad()
    assert p.grad is None


def test_adam_first_step_is_signed():
    p = ad.parameter(np.array([1.0, -3.0]), "p")
    optimizer = Adam([p], lr=0.01)
    (p * p).sum().backward()
    optimizer.step()
    assert_allclose(p.data, [1.0 - 0.01, -3.0 + 0.01], rtol=1e-6)


def test_optimizer_validation():
    p = ad.parameter(np.zeros(1), "p")
    with pytest.raises(ParameterError):
        SGD([p], lr=0.0)
    with pytest.raises(ParameterError):
        Adam([p], beta1=1.0)

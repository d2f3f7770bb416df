"""
测试各定理界的组装、约束上限、核体积与化简关系
"""
import json
import math
from pathlib import Path

import numpy as np
import pytest
from numpy.testing import assert_allclose

from core.activations import make_activation
from core.base.domain import DomainBox
from core.base.errors import ApplicabilityError, ConstraintViolationError, InjectivityError, ParameterError
from core.base.montecarlo import uniform_config
from core.bounds import (
    bound_cnn,
    bound_thm1,
    bound_thm2,
    bound_thm3,
    bound_thm4,
    estimate_alpha,
    evaluate_bound,
    kernel_volume,
    thm1_for_spec,
    tradeoff_profile,
)
from core.network import FinalTransform, NetworkSpec, conv_layer, dense_layer, load_network, pool_layer

ROOT = Path(__file__).parent.parent
TANH = make_activation("tanh")
UNIT_BUMP_2D = math.sqrt(2.0 / math.pi)  # ||v|| = 1 on R^2


def _rotation(angle):
    return np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])


def _two_layer(w1, w2, flavor="plain", w3=1.0):
    box = DomainBox.cube(-1.0, 1.0, np.asarray(w1).shape[1])
    return NetworkSpec(box, (dense_layer(w1, activation=TANH), dense_layer(w2)),
                       FinalTransform("gaussian_bump", w3=w3), model_flavor=flavor)


def test_thm1_arithmetic():
    assert bound_thm1([2.0], 3.0, 100).value == pytest.approx(0.6)
    assert bound_thm1([1.0, 1.0], 1.0, 1).value == pytest.approx(1.0)
    assert bound_thm1([math.cosh(1.0)], 1.0, 100).value == pytest.approx(0.15431, abs=5e-6)
    assert bound_thm1([], 2.0, 4).value == pytest.approx(1.0)


def test_thm1_rejects_empty_sample():
    with pytest.raises(ParameterError):
        bound_thm1([1.0], 1.0, 0)


def test_thm1_toy_spec():
    spec = load_network(ROOT / "configs" / "toy_orthogonal_tanh.yaml")
    report = thm1_for_spec(spec, 100)
    assert report.value == pytest.approx(math.cosh(1.0) / 10.0, rel=1e-8)
    assert "bound = 0.15431" in report.summary()


def test_thm2_determinant_product():
    spec = _two_layer(2.0 * np.eye(2), 2.0 * np.eye(2), flavor="affine_scaled")
    report = bound_thm2(spec, 100)
    plain = thm1_for_spec(spec, 100)
    assert [layer.det_factor for layer in report.per_layer] == pytest.approx([0.5, 0.5])
    assert report.value == pytest.approx(plain.value / 4.0, rel=1e-12)


def test_thm2_orthogonal_equals_thm1():
    spec = _two_layer(_rotation(0.3), _rotation(-1.1), flavor="affine_scaled")
    assert bound_thm2(spec, 50).value == pytest.approx(thm1_for_spec(spec, 50).value, rel=1e-12)


def test_thm2_cap():
    spec = _two_layer(2.0 * np.eye(2), 2.0 * np.eye(2), flavor="affine_scaled")
    assert bound_thm2(spec, 100, cap=1.0).cap == pytest.approx(1.0)
    small = _two_layer(0.5 * np.eye(2), np.eye(2), flavor="affine_scaled")
    with pytest.raises(ConstraintViolationError):
        bound_thm2(small, 100, cap=1.0)


def test_thm2_scaling_law():
    w = np.array([[1.0, 0.4], [-0.2, 0.8]])
    base = bound_thm2(_two_layer(w, np.eye(2), flavor="affine_scaled"), 10).per_layer[0].det_factor
    for c in (0.5, 3.0):
        scaled = bound_thm2(_two_layer(c * w, np.eye(2), flavor="affine_scaled"), 10).per_layer[0].det_factor
        assert scaled == pytest.approx(base * c ** -1.0, rel=1e-12)


def test_thm2_singular_points_to_thm4():
    spec = load_network(ROOT / "configs" / "singular_dense.yaml")
    with pytest.raises(ApplicabilityError) as info:
        bound_thm2(spec, 100)
    assert info.value.hint == "thm4"


def test_thm2_rejects_other_flavors():
    with pytest.raises(ParameterError) as info:
        bound_thm2(_two_layer(np.eye(2), np.eye(2)), 100)
    assert info.value.hint == "thm3"
    with pytest.raises(ParameterError) as info:
        bound_thm2(load_network(ROOT / "configs" / "cnn_pool.yaml"), 100)
    assert info.value.hint == "cnn"


def test_thm2_negative_column_product():
    w = np.array([[-0.1285, 1.3665], [-0.6652, 0.3515]])
    spec = _two_layer(w, np.eye(2), flavor="affine_scaled")
    report = bound_thm2(spec, 100)
    factor = abs(np.linalg.det(w)) ** -0.5
    assert report.per_layer[0].det_factor == pytest.approx(factor, rel=1e-12)
    assert report.per_layer[1].det_factor == pytest.approx(1.0, rel=1e-12)
    assert report.value == pytest.approx(thm1_for_spec(spec, 100).value * factor, rel=1e-12)


@pytest.mark.parametrize("n", [2, 4, 9, 16])
def test_thm2_det_factor_random_square(n):
    rng = np.random.default_rng(300 + n)
    for _ in range(5):
        w = rng.standard_normal((n, n))
        spec = NetworkSpec(DomainBox.cube(-1.0, 1.0, n), (dense_layer(w),), FinalTransform("gaussian_bump"),
                           model_flavor="affine_scaled")
        report = bound_thm2(spec, 10)
        factor = report.per_layer[0].det_factor
        assert factor ** 2 * abs(np.linalg.det(w)) == pytest.approx(1.0, rel=1e-9)
        assert report.value == pytest.approx(thm1_for_spec(spec, 10).value * factor, rel=1e-9)


def test_thm3_single_layer():
    spec = NetworkSpec(DomainBox.cube(-1.0, 1.0, 2), (dense_layer(np.diag([2.0, 3.0])),), FinalTransform("gaussian_bump"))
    report = bound_thm3(spec, 100)
    expected = math.sqrt(math.pi / 2.0) / math.sqrt(6.0) / 10.0
    assert report.value == pytest.approx(expected, rel=1e-12)
    assert report.value == pytest.approx(0.05117, abs=5e-6)
    assert report.per_layer[0].alpha is None


def test_thm3_conservative_orthogonal_equals_thm1():
    spec = _two_layer(_rotation(0.7), _rotation(2.0))
    report = bound_thm3(spec, 100, alpha_mode="conservative")
    assert report.value == pytest.approx(thm1_for_spec(spec, 100).value, rel=1e-12)


def test_thm3_rank_deficient():
    spec = _two_layer(np.array([[1.0, 1.0], [1.0, 1.0]]), np.eye(2))
    with pytest.raises(InjectivityError):
        bound_thm3(spec, 100, alpha_mode="conservative")


def test_thm3_linear_in_alpha():
    spec = _two_layer(_rotation(0.4), np.diag([1.5, 0.5]))
    mc = uniform_config(spec.input_domain, 2000, 7)
    estimated = bound_thm3(spec, 100, mc=mc)
    conservative = bound_thm3(spec, 100, mc=mc, alpha_mode="conservative")
    alpha = estimated.per_layer[0].alpha.ratio
    assert estimated.value == pytest.approx(conservative.value * alpha, rel=1e-12)


def test_alpha_examples():
    one = lambda points: np.ones(points.shape[0])
    mc = uniform_config(DomainBox.cube(0.0, 1.0, 2), 1000, 0)
    same = estimate_alpha(one, np.eye(2), DomainBox.cube(0.0, 1.0, 2), DomainBox.cube(0.0, 1.0, 2), mc)
    assert same.ratio == pytest.approx(1.0)
    larger = estimate_alpha(one, np.eye(2), DomainBox.cube(0.0, 1.0, 2), DomainBox.cube(0.0, 2.0, 2), mc)
    assert larger.ratio == pytest.approx(0.5)
    with pytest.raises(InjectivityError):
        estimate_alpha(one, np.array([[1.0, 1.0], [1.0, 1.0]]), DomainBox.cube(0.0, 1.0, 2), DomainBox.cube(0.0, 2.0, 2), mc)


def test_alpha_envelope():
    """a <= |h|^2 <= b 且 b vol(WX) <= a vol(X~) 时 alpha <= 1"""
    h = lambda points: 1.0 + 0.1 * np.sin(points[:, 0])
    mc = uniform_config(DomainBox.cube(0.0, 1.0, 2), 5000, 3)
    result = estimate_alpha(h, np.eye(2), DomainBox.cube(0.0, 1.0, 2), DomainBox.cube(-1.0, 2.0, 2), mc)
    assert result.ratio <= 1.0


def test_kernel_volume():
    assert kernel_volume(np.eye(2), DomainBox.cube(0.0, 1.0, 2)) == 1.0
    assert kernel_volume(np.eye(3), DomainBox.cube(-1.0, 1.0, 3)) == 8.0
    assert kernel_volume(np.zeros((3, 0)), None) == 1.0
    with pytest.raises(ParameterError):
        kernel_volume(np.eye(2), None)


def test_thm4_rank_deficient_layer():
    spec = NetworkSpec(DomainBox.cube(-1.0, 1.0, 2), (dense_layer(np.diag([2.0, 0.0])),),
                       FinalTransform("gaussian_bump", w3=UNIT_BUMP_2D))
    report = bound_thm4(spec, 100, alpha_mode="conservative")
    assert report.v_norm == pytest.approx(1.0)
    assert report.per_layer[0].kernel_volume == pytest.approx(2.0, rel=1e-12)
    assert report.value == pytest.approx(2.0 / math.sqrt(2.0) / 10.0, rel=1e-10)
    assert report.value == pytest.approx(0.1414, abs=5e-5)

    half = bound_thm4(spec, 100, alpha_mode="conservative", y_boxes={1: DomainBox.cube(-0.5, 0.5, 1)})
    assert half.value == pytest.approx(report.value / 2.0, rel=1e-12)


def test_thm4_reduces_to_thm3():
    rng = np.random.default_rng(5)
    w1 = rng.standard_normal((3, 2))
    w2 = rng.standard_normal((3, 3))
    spec = _two_layer(w1, w2)
    mc = uniform_config(spec.input_domain, 2000, 11)
    three = bound_thm3(spec, 100, mc=mc)
    four = bound_thm4(spec, 100, mc=mc)
    assert four.value == pytest.approx(three.value, rel=1e-10)
    assert all(layer.kernel_volume == 1.0 for layer in four.per_layer)


def test_thm4_non_injective_alpha_warning():
    spec = _two_layer(np.array([[1.0, 1.0], [1.0, 1.0]]), np.eye(2))
    with pytest.warns(Warning, match="not injective"):
        report = bound_thm4(spec, 100, mc=uniform_config(spec.input_domain, 1000, 0))
    assert report.per_layer[0].alpha is None
    assert report.notes


def test_sample_size_scaling():
    spec = _two_layer(_rotation(0.2), np.diag([1.0, 2.0]))
    for theorem in ("thm1", "thm3", "thm4"):
        low = evaluate_bound(spec, theorem, 100, alpha_mode="conservative").value
        high = evaluate_bound(spec, theorem, 400, alpha_mode="conservative").value
        assert high == pytest.approx(low / 2.0, rel=1e-14)


def test_cnn_delta_kernels():
    box = DomainBox.cube(-1.0, 1.0, 4)
    for c in (1.0, 2.0, 0.5):
        spec = NetworkSpec(box, (conv_layer([c, 0.0, 0.0, 0.0], activation=TANH),), FinalTransform("gaussian_bump"),
                           model_flavor="cnn")
        layer = bound_cnn(spec, 100).per_layer[0]
        assert layer.beta == pytest.approx(c ** 4)
        assert layer.det_factor == pytest.approx(c ** -2.0)


def test_cnn_with_pooling():
    spec = load_network(ROOT / "configs" / "cnn_pool.yaml")
    report = bound_cnn(spec, 100)
    assert [layer.kind for layer in report.per_layer] == ["conv", "conv"]
    assert report.per_layer[0].kernel_volume > 0.0
    assert report.value == pytest.approx(report.recompute())
    assert report.notes == ["hat_mode = propagated"]


def test_cnn_applicability():
    spec = _two_layer(np.eye(2), np.eye(2))
    with pytest.raises(ApplicabilityError):
        bound_cnn(spec, 100)
    box = DomainBox.cube(-1.0, 1.0, 4)
    dense_only = NetworkSpec(box, (pool_layer([4], [2]),), FinalTransform("gaussian_bump"), model_flavor="cnn")
    with pytest.raises(ApplicabilityError):
        bound_thm3(dense_only, 100)


def test_unknown_theorem():
    spec = _two_layer(np.eye(2), np.eye(2))
    with pytest.raises(ParameterError):
        evaluate_bound(spec, "thm9", 10)


def test_report_is_deterministic(tmp_path):
    spec = _two_layer(_rotation(0.5), np.diag([1.0, 2.0]))
    for name in ("a.json", "b.json"):
        report = bound_thm3(spec, 100, mc=uniform_config(spec.input_domain, 2000, 42))
        report.save(tmp_path / name)
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    data = json.loads((tmp_path / "a.json").read_text())
    assert data["theorem"] == "thm3"
    assert data["seed"] == 42
    assert len(data["per_layer"]) == 2


def test_tradeoff_profile():
    spec = load_network(ROOT / "configs" / "toy_orthogonal_tanh.yaml")
    table = tradeoff_profile(spec, [0.5, 1.0, 2.0], sample_size=100)
    assert list(table["scale"]) == [0.5, 1.0, 2.0]
    assert table["koopman_product"].is_monotonic_increasing
    assert table["det_product"].is_monotonic_decreasing
    assert_allclose(table["det_product"], [2.0, 1.0, 0.5], rtol=1e-12)
    with pytest.raises(ParameterError):
        tradeoff_profile(spec, [0.0])

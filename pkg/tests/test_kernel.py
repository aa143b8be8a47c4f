import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from sievelab.kernel import (GammaBox, KernelError, constant_kernel, double_integral, evaluate, gauss_rule,
                             gaussian_kernel, kernel_from_spec, load_tabulated_kernel, midpoint_rule,
                             row_integral, separable_kernel, tabulated_kernel)

G1 = GammaBox.centered(1.0, 1)
coord = st.floats(-0.5, 0.5, allow_nan=False)


def test_constant_kernel_evaluates_to_constant():
    k = constant_kernel(1.0, G1)
    assert evaluate(k, 0.3, -0.2) == 1.0
    assert k.k_min == k.k_max == 1.0


def test_gaussian_on_diagonal_is_amplitude():
    assert evaluate(gaussian_kernel(G1), 0.1, 0.1) == 1.0


def test_symmetry_on_random_pairs():
    r = np.random.default_rng(1)
    x, y = r.uniform(-0.5, 0.5, (2, 1000))
    for k in (gaussian_kernel(G1, 2.0, 0.3), separable_kernel(G1)):
        assert np.array_equal(evaluate(k, x, y), evaluate(k, y, x))


def test_point_outside_gamma_rejected():
    with pytest.raises(KernelError):
        evaluate(constant_kernel(1.0, G1), 0.7, 0.0)


def test_non_positive_kernel_rejected():
    with pytest.raises(KernelError):
        separable_kernel(G1, base=0.2, amplitude=-1.0, omega=np.pi)
    with pytest.raises(KernelError):
        constant_kernel(0.0, G1)


def test_asymmetric_table_is_symmetrised():
    t = np.array([[1.0, 2.0], [4.0, 3.0]])
    k = tabulated_kernel(t, G1)
    assert evaluate(k, -0.5, 0.5) == evaluate(k, 0.5, -0.5) == 3.0


def test_tabulated_file_roundtrip(tmp_path):
    p = tmp_path / "k.txt"
    p.write_text("3 3\n1 1 1\n1 2 1\n1 1 1\n")
    k = load_tabulated_kernel(p, G1)
    assert evaluate(k, 0.0, 0.0) == pytest.approx(2.0)
    assert evaluate(k, 0.25, 0.0) == pytest.approx(1.5)


def test_row_integral_constant():
    q = midpoint_rule(G1, 16)
    assert row_integral(constant_kernel(1.0, G1), 0.2, q) == pytest.approx(1.0, abs=1e-14)
    box = GammaBox.centered(2.0, 2)
    assert row_integral(constant_kernel(3.0, box), [0.1, 0.2], midpoint_rule(box, 5)) == pytest.approx(12.0)


def test_row_integral_gaussian_matches_adaptive_quadrature():
    k = gaussian_kernel(G1)
    ref, _ = quad(lambda y: np.exp(-y * y), -0.5, 0.5, epsabs=1e-14)
    assert abs(row_integral(k, 0.0, gauss_rule(G1, 64, 3)) - ref) < 1e-8


def test_row_integral_midpoint_order_two():
    k = gaussian_kernel(G1, 1.0, 0.5)
    ref, _ = quad(lambda y: np.exp(-((0.1 - y) / 0.5) ** 2), -0.5, 0.5, epsabs=1e-14)
    errs = [abs(row_integral(k, 0.1, midpoint_rule(G1, m)) - ref) for m in (16, 32, 64)]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 1.9)


def test_double_integral_examples():
    q = midpoint_rule(G1, 32)
    k1 = constant_kernel(1.0, G1)
    assert double_integral(k1, lambda x, y: np.ones_like(x * y), q) == pytest.approx(1.0, abs=1e-13)
    assert abs(double_integral(k1, lambda x, y: x + y, q)) < 1e-14


def test_double_integral_gaussian_refinement_oracle():
    k = gaussian_kernel(G1)
    coarse = double_integral(k, lambda x, y: np.ones_like(x * y), gauss_rule(G1, 20, 3))
    fine = double_integral(k, lambda x, y: np.ones_like(x * y), gauss_rule(G1, 200, 3))
    assert abs(coarse - fine) < 1e-8


@given(st.floats(-2, 2), st.floats(-2, 2))
def test_double_integral_swap_symmetry(a, b):
    k = gaussian_kernel(G1, 1.0, 0.7)
    q = midpoint_rule(G1, 12)
    v = lambda x, y: np.sin(a * x) * np.cos(b * y) + x * y * y
    w = lambda x, y: v(y, x)
    assert abs(double_integral(k, v, q) - double_integral(k, w, q)) < 1e-12


@given(coord, coord)
def test_separable_symmetric_and_bounded(x, y):
    k = separable_kernel(G1)
    v = evaluate(k, x, y)
    assert v == evaluate(k, y, x)
    assert v >= k.k_min - 1e-12 and v > 0


def test_quadrature_weights_sum_to_area():
    box = GammaBox.centered(0.7, 2)
    for q in (midpoint_rule(box, 7), gauss_rule(box, 3, 2)):
        assert abs(q.weights.sum() - 0.49) < 1e-12 * 0.49


def test_kernel_from_spec_kinds():
    assert kernel_from_spec("gaussian", G1).kind == "gaussian"
    assert kernel_from_spec({"kind": "constant", "value": 2.5}, G1).params == (2.5,)
    assert kernel_from_spec({"kind": "tabulated", "table": [[1, 1], [1, 1]]}, G1).k_min == pytest.approx(1.0)
    with pytest.raises(KernelError):
        kernel_from_spec({"kind": "nope"}, G1)

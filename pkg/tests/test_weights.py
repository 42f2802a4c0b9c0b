import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from wiener_neumann.domains import half_space
from wiener_neumann.gaussian import CylFunction, GaussianModel
from wiener_neumann.weights import (MoreauYosida, Weight, linear_weight, my_gradient, my_hessian,
                                    my_value, norm_power_weight, penalized, prox, zero_weight)


def quadratic(model):
    return CylFunction.from_expr(sum(s**2 for s in model.symbols) / 2, model)


@pytest.mark.parametrize("lam", [[1.0], [2.0, 0.5], [1.0, 3.0, 0.2]])
@pytest.mark.parametrize("alpha", [0.1, 0.5, 1.0])
def test_quadratic_prox_closed_form(lam, alpha):
    m = GaussianModel(lam)
    x = np.linspace(-1.5, 1.2, m.dim) * m.sqrt_spectrum
    f = quadratic(m)
    res = prox(f, x, alpha)
    np.testing.assert_allclose(res.minimizer, -alpha * x / (1 + alpha), atol=1e-10)
    cm2 = np.sum(x**2 / m.spectrum)
    assert my_value(f, x, alpha) == pytest.approx(cm2 / (2 * (1 + alpha)), rel=1e-10)
    np.testing.assert_allclose(my_hessian(f, x, alpha), np.eye(m.dim) / (1 + alpha), atol=1e-9)


def test_prox_of_zero_is_zero(std2):
    res = prox(zero_weight(std2), np.array([[1.0, 2.0]]), 0.3)
    np.testing.assert_allclose(res.minimizer, 0.0)


def test_prox_vanishes_as_alpha_shrinks(std2):
    f = norm_power_weight(std2)
    x = np.array([0.7, -0.4])
    sizes = [np.linalg.norm(prox(f, x, a).minimizer) for a in (1e-1, 1e-2, 1e-3)]
    assert sizes[0] > sizes[1] > sizes[2]
    assert sizes[2] < 1e-2


@given(st.floats(0.01, 1.0), st.floats(-2, 2), st.floats(-2, 2))
@settings(max_examples=30, deadline=None)
def test_envelope_below_function_and_gradient_formula(alpha, a, b):
    m = GaussianModel([0.5, 1.5])
    f = norm_power_weight(m, 0.7)
    x = np.array([a, b])
    assert my_value(f, x, alpha) <= f(x) + 1e-12
    eps = 1e-5
    fd = [(my_value(f, x + eps * m.h_basis(i), alpha) - my_value(f, x - eps * m.h_basis(i), alpha)) / (2 * eps)
          for i in range(2)]
    np.testing.assert_allclose(my_gradient(f, x, alpha), fd, rtol=1e-5, atol=1e-7)


def test_nonconvex_rejected(std1):
    f = CylFunction.from_expr(-std1.symbols[0] ** 4, std1)
    with pytest.raises(ValueError, match="convexity violated"):
        prox(f, np.array([1.0]), 0.5)
    with pytest.raises(ValueError, match="convexity violated"):
        Weight(std1, f).check_convexity()


def test_moreau_yosida_weight_matches_functions(aniso2):
    f = norm_power_weight(aniso2)
    env = MoreauYosida(f, 0.2)
    x = np.array([[0.3, -0.2], [1.0, 0.5]])
    np.testing.assert_allclose(env.value(x), my_value(f, x, 0.2))
    np.testing.assert_allclose(env.grad(x), my_gradient(f, x, 0.2))


@pytest.mark.parametrize("alpha", [0.5, 0.1, 0.01])
def test_penalized_examples(std1, alpha):
    d = half_space(std1, [1.0], 0.0)
    V = penalized(zero_weight(std1), d, alpha)
    assert V.value(np.array([-1.0])) == pytest.approx(0.0)
    assert V.value(np.array([1.0])) == pytest.approx(1 / (2 * alpha))
    np.testing.assert_allclose(V.grad(np.array([2.0])), [2.0 / alpha])


def test_penalized_alpha_range(std1):
    d = half_space(std1, [1.0], 0.0)
    for a in (0.0, 1.5):
        with pytest.raises(ValueError):
            penalized(zero_weight(std1), d, a)


def test_penalized_converges_to_indicator(aniso2):
    d = half_space(aniso2, [1.0, 1.0], 0.0)
    w = linear_weight(aniso2, [0.3, -0.1])
    inside, outside = np.array([-0.5, -0.2]), np.array([0.5, 0.3])
    vals = [penalized(w, d, a).value(inside) for a in (0.1, 0.01, 0.001)]
    assert abs(vals[-1] - w(inside)) < abs(vals[0] - w(inside)) + 1e-15
    assert abs(vals[-1] - w(inside)) < 1e-2
    assert penalized(w, d, 0.001).value(outside) > 100


def test_linear_weight_is_ambient(std2):
    w = linear_weight(GaussianModel([4.0, 1.0]), [1.0, 2.0])
    assert w(np.array([1.0, 1.0])) == pytest.approx(3.0)
    np.testing.assert_allclose(w.grad(np.array([1.0, 1.0])), [2.0, 2.0])

from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

from wiener_neumann.domains import half_space
from wiener_neumann.experiments import boundary_probes
from wiener_neumann.extension import (approximation_report, b_values, corrupted_coefficients, extend,
                                      matching_report, operator_norm_probe, solve_coefficients)
from wiener_neumann.gaussian import CylFunction, GaussianModel
from wiener_neumann.probes import LCG, neumann_polynomial, random_polynomial

# frozen from the exact rational solve at r = 1
A_R1 = [4.9506, -297.607, 3085.70, -10993.8, 17397.2, -12689.3, 3493.89]
A_R0 = [0.489, 2.513, 0.245, -1.387, -1.775, -0.768, 1.683]


@pytest.fixture(scope="module")
def coeffs1():
    return solve_coefficients(1.0)


def test_b_vector():
    expected = [Fraction(0), Fraction(3, 4), Fraction(8, 9), Fraction(15, 16), Fraction(24, 25),
                Fraction(35, 36), Fraction(48, 49)]
    assert b_values() == expected


def test_coefficients_frozen(coeffs1):
    np.testing.assert_allclose(coeffs1.a, A_R1, rtol=1e-5)
    np.testing.assert_allclose(solve_coefficients(0.0).a, A_R0, atol=1e-3)


@pytest.mark.parametrize("r", [1.0, 0.5, -0.7, 0.0])
def test_exact_residuals_vanish(r):
    c = solve_coefficients(r)
    res = c.residuals()
    assert max(res["exact"]) == 0.0
    assert max(res["relative_double"]) < 1e-15
    assert np.isfinite(c.condition_number)


def test_independent_float_solve_agrees(coeffs1):
    from wiener_neumann.extension import coefficient_rows
    A = np.array([[float(x) for x in row] for row in coefficient_rows(True)])
    rhs = np.zeros(7)
    rhs[0] = 1.0
    a = np.linalg.solve(A, rhs)
    np.testing.assert_allclose(a, coeffs1.a, rtol=1e-10)


def test_constant_extends_to_sum_a():
    m = GaussianModel([1.0])
    d = half_space(m, [1.0], 0.0)
    c = solve_coefficients(0.0)
    ef = extend(CylFunction.constant(1.0, m), c, d)
    assert ef(np.array([[0.0]]))[0] == pytest.approx(1.0, abs=1e-12)
    x = np.array([[0.4]])
    expected = sum(a * np.exp(-b * 0.4**2 / 2) for a, b in zip(c.a, c.b))
    assert ef(x)[0] == pytest.approx(expected, rel=1e-10)


def test_mismatched_offset_rejected(coeffs1):
    m = GaussianModel([1.0])
    with pytest.raises(ValueError):
        extend(m.hat(0), coeffs1, half_space(m, [1.0], 0.5))


@pytest.mark.parametrize("seed", range(3))
def test_matching_random_polynomials(coeffs1, seed):
    m = GaussianModel([1.0, 0.5])
    d = half_space(m, [1.0, 0.0], 1.0)
    f = random_polynomial(m, 4, LCG(seed))
    rep = matching_report(extend(f, coeffs1, d), boundary_probes(d))
    assert max(rep["c0"], rep["c1"], rep["c2"]) < 1e-6


def test_matching_cubic_in_normal_coordinate(coeffs1):
    m = GaussianModel([1.0])
    d = half_space(m, [1.0], 1.0)
    f = CylFunction.from_expr(m.symbols[0] ** 3 - 2 * m.symbols[0], m)
    rep = matching_report(extend(f, coeffs1, d), boundary_probes(d))
    assert max(rep["c0"], rep["c1"], rep["c2"]) < 1e-6


def test_corrupted_coefficients_break_c2(coeffs1):
    m = GaussianModel([1.0])
    d = half_space(m, [1.0], 1.0)
    f = CylFunction.from_expr(m.symbols[0] ** 2, m)
    rep = matching_report(extend(f, corrupted_coefficients(coeffs1), d), boundary_probes(d))
    assert rep["c2"] > 1e-3


def test_extension_restricts_and_is_linear(coeffs1):
    m = GaussianModel([1.0, 0.5])
    d = half_space(m, [1.0, 0.0], 1.0)
    rng = LCG(4)
    f, g = random_polynomial(m, 3, rng), random_polynomial(m, 3, rng)
    x = np.array([[0.2, 0.1], [-1.0, 0.3], [1.4, -0.2], [2.0, 0.5]])
    ef, eg, efg = extend(f, coeffs1, d), extend(g, coeffs1, d), extend(f + g, coeffs1, d)
    inside = d.contains(x)
    np.testing.assert_array_equal(ef(x[inside]), f(x[inside]))
    scale = np.sum(np.abs(coeffs1.a)) * (np.abs(ef(x)) + np.abs(eg(x)) + 1)
    assert np.all(np.abs(efg(x) - ef(x) - eg(x)) <= 1e-12 * scale)


def test_operator_norm_finite_and_stable(coeffs1):
    m = GaussianModel([1.0])
    d = half_space(m, [1.0], 1.0)
    tests = [random_polynomial(m, 4, LCG(s)) for s in range(4)] + [CylFunction.constant(1.0, m)]
    k40 = operator_norm_probe(tests, coeffs1, d, order=40)
    k60 = operator_norm_probe(tests, coeffs1, d, order=60)
    assert 1.0 <= k40["K"] < np.inf
    assert abs(k60["K"] - k40["K"]) <= 0.1 * k40["K"]


def test_approximants_keep_neumann_condition(coeffs1):
    m = GaussianModel([1.0, 0.5])
    d = half_space(m, [1.0, 0.0], 1.0)
    rep = approximation_report(neumann_polynomial(d, 4, LCG(8)), coeffs1, d)
    assert max(r["neumann_defect"] for r in rep["rows"]) < 1e-12
    assert rep["decreasing"]

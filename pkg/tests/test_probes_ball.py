import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from wiener_neumann import ball
from wiener_neumann.domains import half_space
from wiener_neumann.gaussian import GaussianModel
from wiener_neumann.probes import LCG, neumann_polynomial


def test_lcg_reference_stream():
    rng = LCG(0)
    assert rng.next_u64() == 1442695040888963407
    assert rng.next_u64() == (6364136223846793005 * 1442695040888963407 + 1442695040888963407) % 2**64


@given(st.integers(0, 2**32))
@settings(max_examples=20)
def test_lcg_deterministic_and_bounded(seed):
    a, b = LCG(seed).uniform(50, -1, 1), LCG(seed).uniform(50, -1, 1)
    np.testing.assert_array_equal(a, b)
    assert np.all((a >= -1) & (a < 1))


@pytest.mark.parametrize("seed", range(5))
def test_neumann_polynomial_is_neumann(seed):
    m = GaussianModel([0.5, 0.25])
    d = half_space(m, [1.0, -0.5], 0.3)
    u = neumann_polynomial(d, 4, LCG(seed))
    y = d.boundary_rule().nodes
    assert np.max(np.abs(np.sum(u.grad(y) * d.normal_H(y), axis=1))) < 1e-8


def test_ode_solution_matches_closed_form():
    expr = ball.ode_solution([1.0, 4.0])
    assert sp.simplify(expr - sp.atan(ball.S1**2 / ball.S2)) == 0
    assert ball.ode_residual(expr, [1.0, 4.0]) <= 1e-8


@pytest.mark.parametrize("spectrum", [[1.0, 4.0], [2.0, 3.0], [1.0, 1.0]])
def test_solution_constant_along_flow(spectrum):
    expr = ball.ode_solution(spectrum)
    assert ball.ode_residual(expr, spectrum) <= 1e-8
    assert ball.flow_variation(expr, spectrum, [[0.5, 0.5], [0.2, 0.9]]) < 1e-12


def test_characteristic_curves_reach_origin_with_distinct_values():
    expr = ball.ode_solution([1.0, 4.0])
    a, b = ball.curve_limit(expr, [1.0, 4.0], 1.0), ball.curve_limit(expr, [1.0, 4.0], 2.0)
    assert a == pytest.approx(np.arctan(1.0))
    assert b == pytest.approx(np.arctan(2.0))


def test_ray_limits_for_quadratic_exponent():
    # along rays s1^2/s2 -> 0, so every ray reaches g(0)
    expr = ball.ode_solution([1.0, 4.0])
    for theta in (np.pi / 4, np.pi / 3):
        assert abs(ball.ray_limit(expr, theta)) < 1e-9

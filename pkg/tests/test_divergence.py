import numpy as np
import pytest
import sympy as sp

from wiener_neumann.divergence import (CylVectorField, adjointness_residual, bilinear_identity_residual,
                                       boundary_hessian_identity, divergence, divergence_norm,
                                       halfspace_tangent_field, ibp_residual, rotation_field,
                                       sphere_tangent_field, symbolic_equal, z_norm)
from wiener_neumann.domains import half_space, unit_ball, whole_space
from wiener_neumann.gaussian import CylFunction, GaussianModel
from wiener_neumann.probes import LCG, random_polynomial
from wiener_neumann.weights import linear_weight, norm_power_weight, zero_weight

WEIGHTS = {
    "zero": zero_weight,
    "linear": lambda m: linear_weight(m, np.linspace(0.4, -0.3, m.dim)),
    "phi_norm": norm_power_weight,
}


def test_divergence_of_constant_direction(std2):
    phi = CylVectorField(std2, [(CylFunction.constant(1.0, std2), 0)])
    assert symbolic_equal(divergence(phi, zero_weight(std2)), -std2.hat(0))


def test_divergence_of_hat_times_direction(std2):
    phi = CylVectorField(std2, [(std2.hat(0), 0)])
    expected = CylFunction.from_expr(1 - std2.symbols[0] ** 2, std2)
    assert symbolic_equal(divergence(phi, zero_weight(std2)), expected)


def test_rotation_field_isotropic_divergence_free(std2):
    field = rotation_field(std2, 0, 1, "scaled")
    assert sp.simplify(divergence(field, zero_weight(std2)).expr) == 0


def test_divergence_is_linear(aniso2):
    rng = LCG(3)
    w = WEIGHTS["phi_norm"](aniso2)
    a = CylVectorField(aniso2, [(random_polynomial(aniso2, 2, rng), 0), (random_polynomial(aniso2, 2, rng), 1)])
    b = CylVectorField(aniso2, [(random_polynomial(aniso2, 2, rng), 1)])
    lhs = divergence(a + b.scale(2.0), w)
    rhs = divergence(a, w) + divergence(b, w) * 2.0
    x = np.array([[0.1, 0.4], [-1.0, 2.0]])
    np.testing.assert_allclose(lhs(x), rhs(x), rtol=1e-12)


def test_non_tangent_field_rejected(std2):
    d = half_space(std2, [1.0, 0.0], 0.0)
    phi = CylVectorField(std2, [(CylFunction.constant(1.0, std2), 0)])
    with pytest.raises(ValueError, match="not in Z"):
        divergence(phi, zero_weight(std2), d)


def test_ibp_zero_function(std1):
    d = half_space(std1, [1.0], 0.0)
    assert ibp_residual(CylFunction.constant(0.0, std1), 0, zero_weight(std1), d) == 0.0


def test_ibp_one_dimensional_constant(std1):
    d = half_space(std1, [1.0], 0.0)
    assert abs(ibp_residual(CylFunction.constant(1.0, std1), 0, zero_weight(std1), d)) < 1e-14


@pytest.mark.parametrize("wname", sorted(WEIGHTS))
@pytest.mark.parametrize("domain", ["half1", "half2", "ball2"])
def test_ibp_random_polynomials(domain, wname):
    m = {"half1": GaussianModel([1.0]), "half2": GaussianModel([0.5, 0.25]),
         "ball2": GaussianModel([1.0, 1.0])}[domain]
    d = unit_ball(m) if domain == "ball2" else half_space(m, np.linspace(1.0, -0.5, m.dim), 0.3)
    w = WEIGHTS[wname](m)
    rng = LCG(7)
    for _ in range(3):
        phi = random_polynomial(m, 4, rng)
        for k in range(m.dim):
            assert abs(ibp_residual(phi, k, w, d)) < 1e-6


def test_adjointness_and_bound_halfspace(aniso2):
    d = half_space(aniso2, [1.0, 1.0], 0.2)
    w = WEIGHTS["linear"](aniso2)
    rng = LCG(11)
    for _ in range(3):
        phi = halfspace_tangent_field(d, [random_polynomial(aniso2, 2, rng)], random_polynomial(aniso2, 1, rng))
        f = random_polynomial(aniso2, 3, rng)
        assert abs(adjointness_residual(f, phi, w, d)) < 1e-6
        assert divergence_norm(phi, w, d) <= z_norm(phi, w, d)


def test_boundary_identity_rotation_exact(std2):
    assert boundary_hessian_identity(rotation_field(std2, 0, 1, "scaled"), unit_ball(std2)) < 1e-12


def test_boundary_identity_constant_tangent_halfspace(std2):
    d = half_space(std2, [1.0, 0.0], 0.0)
    phi = CylVectorField(std2, [(CylFunction.constant(1.0, std2), 1)])
    assert boundary_hessian_identity(phi, d) < 1e-14


@pytest.mark.parametrize("lam", [[1.0, 1.0, 1.0], [1.0, 2.0, 0.5]])
def test_boundary_identity_sphere(lam):
    m = GaussianModel(lam)
    d = unit_ball(m)
    rng = LCG(5)
    pairs = {(i, j): random_polynomial(m, 2, rng) for i in range(3) for j in range(i + 1, 3)}
    assert boundary_hessian_identity(sphere_tangent_field(d, pairs), d) < 1e-7


def test_bilinear_identity_trivial(std2):
    one = CylFunction.constant(1.0, std2)
    zero = CylFunction.constant(0.0, std2)
    d = whole_space(std2)
    assert abs(bilinear_identity_residual(one, one, 0, 0, zero_weight(std2), d)) < 1e-12
    assert bilinear_identity_residual(zero, one, 0, 1, zero_weight(std2), d) == 0


def test_bilinear_identity_random_halfspace(aniso2):
    d = half_space(aniso2, [1.0, -0.5], 0.1)
    w = WEIGHTS["linear"](aniso2)
    rng = LCG(2)
    f, g = random_polynomial(aniso2, 2, rng), random_polynomial(aniso2, 2, rng)
    for h in range(2):
        for k in range(2):
            assert abs(bilinear_identity_residual(f, g, h, k, w, d)) < 1e-6

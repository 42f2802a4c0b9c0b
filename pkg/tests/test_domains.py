import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wiener_neumann.domains import (contains, custom_domain, dH_distance, dH_project, half_space,
                                    surface_integrate, trace_restrict, unit_ball, whole_space)
from wiener_neumann.gaussian import GaussianModel

from conftest import circle_nodes

GAMMA0 = 0.3989422804014327


@pytest.mark.parametrize("build, x, expected", [
    (lambda: half_space(GaussianModel([1.0, 1.0]), [1.0, 0.0], 0.0), [-1.0, 5.0], True),
    (lambda: unit_ball(GaussianModel([1.0, 1.0])), [0.0, 0.0], True),
    (lambda: unit_ball(GaussianModel([1.0, 1.0])), [0.8, 0.8], False),
    (lambda: whole_space(GaussianModel([1.0])), [100.0], True),
])
def test_contains(build, x, expected):
    assert bool(contains(build(), np.array(x))) is expected


@pytest.mark.parametrize("d, expected", [
    (half_space(GaussianModel([1.0]), [1.0], 0.0), GAMMA0),
    (half_space(GaussianModel([1.0, 1.0]), [1.0, 0.0], 0.0), GAMMA0),
    (unit_ball(GaussianModel([1.0, 1.0])), np.exp(-0.5)),
])
def test_surface_mass(d, expected):
    assert surface_integrate(d, lambda y: np.ones(len(y))) == pytest.approx(expected, rel=1e-10)


def test_surface_mass_oblique_anisotropic():
    # surface mass of {a.x <= r} is the normal density at s = r/|h_a|_H
    m = GaussianModel([0.5, 2.0])
    d = half_space(m, [1.0, -0.7], 0.4)
    s = 0.4 / np.sqrt(0.5 + 2.0 * 0.49)
    assert d.s == pytest.approx(s)
    assert surface_integrate(d, lambda y: np.ones(len(y))) == pytest.approx(GAMMA0 * np.exp(-s * s / 2), rel=1e-10)


def test_bulk_mass_of_ball():
    d = unit_ball(GaussianModel([1.0, 1.0]))
    assert d.bulk_rule().integrate(np.ones(len(d.bulk_rule().nodes))) == pytest.approx(1 - np.exp(-0.5), rel=1e-10)


def test_trace_restrict_examples():
    m = GaussianModel([1.0, 1.0])
    d = unit_ball(m)
    y = d.boundary_rule().nodes
    np.testing.assert_allclose(trace_restrict(m.hat(1), d), y[:, 1], atol=1e-12)
    np.testing.assert_allclose(trace_restrict(d.G, d), 0.0, atol=1e-12)
    np.testing.assert_allclose(trace_restrict(lambda x: np.full(len(x), 3.0), d), 3.0)


@pytest.mark.parametrize("d, x, expected", [
    (half_space(GaussianModel([1.0]), [1.0], 0.0), [2.0], 2.0),
    (half_space(GaussianModel([1.0]), [1.0], 0.0), [-2.0], 0.0),
    (half_space(GaussianModel([4.0, 1.0]), [1.0, 0.0], 0.0), [2.0, 0.0], 1.0),
])
def test_distance_examples(d, x, expected):
    assert dH_distance(d, np.array(x)) == pytest.approx(expected)


@given(st.floats(1.05, 3.0), st.floats(0, 2 * np.pi))
@settings(max_examples=30, deadline=None)
def test_ball_projection_on_boundary_and_minimal(rad, theta):
    m = GaussianModel([1.0, 2.0])
    d = unit_ball(m)
    x = rad * np.array([np.cos(theta), np.sin(theta)])
    p = dH_project(d, x)
    assert d.G_value(x - p) == pytest.approx(0.0, abs=1e-10)
    # brute force over the boundary
    _, t = circle_nodes(200000)
    bd = np.stack([np.cos(t), np.sin(t)], axis=1)
    brute = np.min(np.sqrt(np.sum((bd - x) ** 2 / m.spectrum, axis=1)))
    assert dH_distance(d, x) <= brute + 1e-9
    assert dH_distance(d, x) >= brute - 1e-7


def test_custom_domain_without_surface_rule():
    m = GaussianModel([1.0, 1.0])
    from wiener_neumann.gaussian import polynomial
    d = custom_domain(m, polynomial({(4, 0): 1.0, (0, 4): 1.0, (0, 0): -1.0}, m))
    with pytest.raises(ValueError, match="no surface rule"):
        d.boundary_rule()


def test_normal_is_unit_and_outward():
    m = GaussianModel([0.5, 2.0])
    d = half_space(m, [1.0, 1.0], 0.2)
    y = d.boundary_rule().nodes[:5]
    nu = d.normal_H(y)
    np.testing.assert_allclose(np.linalg.norm(nu, axis=1), 1.0)
    eps = 1e-3
    outside = y + eps * nu * m.sqrt_spectrum
    assert not np.any(d.contains(outside))

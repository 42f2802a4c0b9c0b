import numpy as np
import pytest
import sympy as sp

from wiener_neumann.domains import half_space, whole_space
from wiener_neumann.gaussian import CylFunction, GaussianModel, hermite_fn
from wiener_neumann.probes import LCG, neumann_polynomial, random_polynomial, rotated_symbols
from wiener_neumann.solver import (TWO_SQRT2, DiscreteProblem, SpectralDiscretization,
                                   StripDiscretization, apply_L, estimate_report, graph_norm_check,
                                   l2_distance, penalization_sweep, solve)
from wiener_neumann.weights import norm_power_weight, zero_weight


def rel_l2(u, v, w, d):
    return l2_distance(u, v, w, d) / l2_distance(v, CylFunction.constant(0.0, v.model), w, d)


@pytest.mark.parametrize("expr, expected", [
    (lambda x: sp.Integer(1), lambda x: sp.Integer(0)),
    (lambda x: x, lambda x: -x),
    (lambda x: x**2 - 1, lambda x: -2 * (x**2 - 1)),
])
def test_apply_L_hermite_eigenfunctions(std1, expr, expected):
    x = std1.symbols[0]
    Lu = apply_L(CylFunction.from_expr(expr(x), std1), zero_weight(std1))
    assert sp.simplify(Lu.expr - expected(x)) == 0


def test_apply_L_with_weight(std1):
    # L u = u'' - xi u' - U' u' with U = xi^4 / 2 and u = xi
    x = std1.symbols[0]
    Lu = apply_L(CylFunction.from_expr(x, std1), norm_power_weight(std1))
    assert sp.simplify(Lu.expr - (-x - 2 * x**3)) == 0


@pytest.mark.parametrize("lam", [0.5, 2.0])
@pytest.mark.parametrize("domain", ["whole", "half"])
def test_constant_data(lam, domain, aniso2):
    d = whole_space(aniso2) if domain == "whole" else half_space(aniso2, [1.0, 0.5], 0.2)
    disc = SpectralDiscretization() if domain == "whole" else StripDiscretization()
    f = CylFunction.constant(3.0, aniso2)
    res = solve(DiscreteProblem(aniso2, norm_power_weight(aniso2), d, lam, f, disc))
    w = norm_power_weight(aniso2)
    # pointwise values are only determined where exp(-U) is representable
    assert rel_l2(res.u, CylFunction.constant(3.0 / lam, aniso2), w, d) < 1e-12
    rep = estimate_report(res)
    np.testing.assert_allclose(rep["ratios"], [1.0, 0.0, 0.0], atol=1e-9)


def test_whole_space_hermite_eigen(std2):
    f = hermite_fn((1, 0), std2)
    res = solve(DiscreteProblem(std2, zero_weight(std2), whole_space(std2), 1.0, f, SpectralDiscretization()))
    x = np.array([[0.3, -1.0], [2.0, 0.5]])
    np.testing.assert_allclose(res.u(x), x[:, 0] / 2, atol=1e-12)
    assert estimate_report(res)["ratios"][0] == pytest.approx(0.5)


def test_halfspace_manufactured_1d(std1):
    d = half_space(std1, [1.0], 0.5)
    x = std1.symbols[0]
    u = CylFunction.from_expr((x - d.s) ** 2, std1)
    f = u - apply_L(u, zero_weight(std1))
    res = solve(DiscreteProblem(std1, zero_weight(std1), d, 1.0, f, StripDiscretization()))
    # frozen: second-order finite volumes at h = 0.025
    assert rel_l2(res.u, u, zero_weight(std1), d) < 5e-5


def test_halfspace_manufactured_2d_oblique(aniso2):
    d = half_space(aniso2, [1.0, -0.5], 0.3)
    e1, e2 = rotated_symbols(aniso2, d.frame)
    u = CylFunction.from_expr(sp.expand((e1 - d.s) ** 2 + e2**2 + e2), aniso2)
    w = zero_weight(aniso2)
    f = 2.0 * u - apply_L(u, w)
    res = solve(DiscreteProblem(aniso2, w, d, 2.0, f, StripDiscretization()))
    assert rel_l2(res.u, u, w, d) < 1e-4


def test_fd_oracle_1d():
    """Ghost-point finite differences at h = 0.0025 for f = xi^2 on xi <= 0."""
    from scipy.sparse import diags
    from scipy.sparse.linalg import spsolve
    m = GaussianModel([1.0])
    h, L = 0.0025, -8.0
    t = np.arange(L, 0 + h / 2, h)
    N = len(t)
    main = 1 + 2 / h**2 * np.ones(N)
    lower = -(1 / h**2 + t[1:] / (2 * h))
    upper = -(1 / h**2 - t[:-1] / (2 * h))
    A = diags([main, lower, upper], [0, -1, 1]).tolil()
    A[0, 1] = -2 / h**2
    A[N - 1, N - 2] = -2 / h**2
    ref = spsolve(A.tocsr(), t**2)
    d = half_space(m, [1.0], 0.0)
    res = solve(DiscreteProblem(m, zero_weight(m), d, 1.0,
                                CylFunction.from_expr(m.symbols[0] ** 2, m), StripDiscretization()))
    err = np.sqrt(np.trapezoid((res.u(t[:, None]) - ref) ** 2 * np.exp(-t**2 / 2), t)
                  / np.trapezoid(ref**2 * np.exp(-t**2 / 2), t))
    assert err < 1e-4


def test_neumann_residual_second_order(std1):
    d = half_space(std1, [1.0], 0.5)
    f = random_polynomial(std1, 3, LCG(1))
    r = [solve(DiscreteProblem(std1, zero_weight(std1), d, 1.0, f, StripDiscretization(mesh=h))).neumann_residual
         for h in (0.1, 0.05, 0.025)]
    assert np.log2(r[0] / r[1]) > 1.8 and np.log2(r[1] / r[2]) > 1.8


def test_cutoff_insufficient(std1):
    d = half_space(std1, [1.0], 0.0)
    f = CylFunction.from_expr(std1.symbols[0] ** 3, std1)
    with pytest.raises(RuntimeError, match="cutoff insufficient"):
        solve(DiscreteProblem(std1, zero_weight(std1), d, 1.0, f, StripDiscretization(cutoff=1.0)))


def test_invalid_lambda(std1):
    with pytest.raises(ValueError):
        DiscreteProblem(std1, zero_weight(std1), whole_space(std1), 0.0,
                        CylFunction.constant(1.0, std1), SpectralDiscretization())


@pytest.mark.parametrize("seed", range(4))
def test_graph_norm_bounds_halfspace(aniso2, seed):
    d = half_space(aniso2, [1.0, 1.0], 0.1)
    u = neumann_polynomial(d, 4, LCG(seed))
    chk = graph_norm_check(u, norm_power_weight(aniso2), d)
    assert chk["graph_norm"] <= chk["sobolev_norm"] * (1 + 1e-8)
    assert chk["sobolev_norm"] <= TWO_SQRT2 * chk["graph_norm"] * (1 + 1e-8)


def test_graph_norm_rejects_non_neumann(std1):
    d = half_space(std1, [1.0], 0.0)
    with pytest.raises(ValueError, match="Neumann condition violated"):
        graph_norm_check(std1.hat(0), zero_weight(std1), d)


def test_penalization_constant_data(std1):
    d = half_space(std1, [1.0], 0.0)
    p = DiscreteProblem(std1, zero_weight(std1), d, 2.0, CylFunction.constant(1.0, std1),
                        StripDiscretization(mesh=0.01))
    sweep = penalization_sweep(p, [0.5, 0.1])
    for row in sweep["rows"]:
        assert row["error"] < 1e-10


def test_penalization_sweep_monotone(std1):
    d = half_space(std1, [1.0], 0.0)
    p = DiscreteProblem(std1, zero_weight(std1), d, 1.0, std1.hat(0), StripDiscretization(mesh=0.005))
    sweep = penalization_sweep(p, [0.5, 0.1, 0.02])
    assert sweep["strictly_decreasing"]
    assert all(r["estimates_pass"] for r in sweep["rows"])

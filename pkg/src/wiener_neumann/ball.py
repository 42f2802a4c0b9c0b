"""The unit ball: rotation fields and the planar Neumann equation of its traces.

A cylindrical ``u = phi(x_1, x_2)`` satisfying the Neumann condition on the
sphere solves ``sqrt(l1) s1 d1 phi + sqrt(l2) s2 d2 phi = 0`` in the planar
unit ball.  Its solutions are ``g(s1**sqrt(l2) * s2**(-sqrt(l1)))``, which are
constant along the flow ``s_i(t) = s_i e^{sqrt(l_i) t}``.
"""
from __future__ import annotations

import numpy as np
import sympy as sp

S1, S2 = sp.symbols("s1 s2", positive=True)


def ode_solution(spectrum, g=sp.atan):
    """``g(s1**sqrt(l2) * s2**(-sqrt(l1)))`` as a sympy expression in ``(S1, S2)``."""
    l1, l2 = (sp.nsimplify(v) for v in spectrum)
    return g(S1 ** sp.sqrt(l2) * S2 ** (-sp.sqrt(l1)))


def ode_operator(expr, spectrum):
    l1, l2 = (sp.nsimplify(v) for v in spectrum)
    return sp.sqrt(l1) * S1 * sp.diff(expr, S1) + sp.sqrt(l2) * S2 * sp.diff(expr, S2)


def ode_residual(expr, spectrum, n_grid: int = 41) -> float:
    """Max of the equation's residual on a grid in the open quarter disc."""
    res = sp.lambdify((S1, S2), ode_operator(expr, spectrum), "numpy")
    r = np.linspace(0.02, 0.98, n_grid)
    th = np.linspace(0.02, np.pi / 2 - 0.02, n_grid)
    R, T = np.meshgrid(r, th)
    vals = np.broadcast_to(np.asarray(res(R * np.cos(T), R * np.sin(T)), dtype=float), R.shape)
    return float(np.max(np.abs(vals)))


def flow_variation(expr, spectrum, starts, t_max: float = 1.0, steps: int = 50) -> float:
    """Max change of ``phi`` along the characteristic flow from the given starts."""
    fn = sp.lambdify((S1, S2), expr, "numpy")
    rates = np.sqrt(np.asarray(spectrum, dtype=float))
    t = np.linspace(-t_max, 0.0, steps)
    worst = 0.0
    for s in np.atleast_2d(starts):
        path = s[None, :] * np.exp(rates[None, :] * t[:, None])
        vals = np.asarray(fn(path[:, 0], path[:, 1]), dtype=float)
        worst = max(worst, float(np.max(vals) - np.min(vals)))
    return worst


def ray_limit(expr, theta: float, radii=None) -> float:
    """Value approached along the ray of angle ``theta`` into the origin."""
    fn = sp.lambdify((S1, S2), expr, "numpy")
    radii = np.logspace(-2, -12, 11) if radii is None else np.asarray(radii)
    vals = np.asarray(fn(radii * np.cos(theta), radii * np.sin(theta)), dtype=float)
    return float(vals[-1])


def curve_limit(expr, spectrum, level: float, radii=None) -> float:
    """Value approached along the characteristic curve ``s1**sqrt(l2) s2**(-sqrt(l1)) = level``."""
    fn = sp.lambdify((S1, S2), expr, "numpy")
    a, b = np.sqrt(np.asarray(spectrum, dtype=float))[::-1]
    s1 = np.logspace(-2, -6, 9) if radii is None else np.asarray(radii)
    s2 = (s1**a / level) ** (1.0 / b)
    vals = np.asarray(fn(s1, s2), dtype=float)
    return float(vals[-1])
